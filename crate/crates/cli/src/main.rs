use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use spectrum_cli::ops::Op;
use spectrum_cli::render;
use spectrum_cli::scenario::{self, Scenario, ScenarioError};
use spectrum_cli::verify::{load_genesis, verify_journal, VerifyError};
use spectrum_client::{ClientError, SpectrumClient};
use spectrum_core::Address;

const ASSERTION_FAILED: u8 = 1;
const TRANSPORT_ERROR: u8 = 2;

/// Client for the spectrum lease ledger service.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Base URL of the ledger service.
    #[arg(long, global = true, env = "SPECTRUM_SERVER", default_value = "http://127.0.0.1:8545")]
    server: String,
    /// Address sent as the caller identity.
    #[arg(long, global = true, env = "SPECTRUM_CALLER")]
    caller: Option<Address>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mint a licensed band as tokens of the minimum allocation width.
    Mint {
        #[arg(long)]
        owner: Address,
        #[arg(long = "start", value_name = "MHZ")]
        start_mhz: u64,
        #[arg(long = "end", value_name = "MHZ")]
        end_mhz: u64,
        #[arg(long)]
        location: String,
    },
    /// Credit an account with new funds.
    Faucet {
        #[arg(long)]
        to: Address,
        #[arg(long, value_name = "ETHER")]
        amount: String,
    },
    /// Move the simulated clock forward.
    AdvanceTime { seconds: u64 },
    /// Lease a token directly to a user.
    SetUser {
        token_id: u64,
        #[arg(long)]
        user: Address,
        #[arg(long, value_name = "SECONDS")]
        lease: u64,
    },
    /// Open an auction for a token.
    Start {
        token_id: u64,
        #[arg(long, value_name = "SECONDS")]
        duration: u64,
        #[arg(long, value_name = "SECONDS")]
        lease: u64,
        #[arg(long)]
        beneficiary: Address,
        #[arg(long, value_name = "ETHER")]
        price: String,
    },
    /// Bid on an open auction.
    Bid {
        token_id: u64,
        #[arg(long, value_name = "ETHER")]
        amount: String,
    },
    /// Settle an auction after its end time.
    End { token_id: u64 },
    /// Reclaim outbid funds.
    Withdraw { token_id: u64 },
    /// List tokens with an open auction.
    Idle,
    /// Show a token.
    Info { token_id: u64 },
    /// Show a token's latest auction.
    Auction { token_id: u64 },
    /// Show an account.
    Account { address: Address },
    /// List known accounts.
    Accounts,
    /// Print journal events after a sequence number.
    Events {
        #[arg(long, default_value_t = 0)]
        since: u64,
    },
    /// Show service health and clock.
    Health,
    /// Show the ledger state hash.
    StateHash,
    /// Run a scenario file against the service.
    Run(RunArgs),
    /// Replay a journal offline and report its final state hash.
    VerifyJournal(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    journal: PathBuf,
    /// Genesis or service config file. Defaults to genesis.json next to the journal.
    #[arg(long)]
    genesis: Option<PathBuf>,
}

impl Cmd {
    /// The operation and its parameters, for the direct commands.
    fn op(&self) -> Option<(Op, Value)> {
        Some(match self {
            Cmd::Mint { owner, start_mhz, end_mhz, location } => (
                Op::Mint,
                json!({"owner": owner, "startFreqMhz": start_mhz, "endFreqMhz": end_mhz, "geoLocation": location}),
            ),
            Cmd::Faucet { to, amount } => (Op::Faucet, json!({"to": to, "amountEther": amount})),
            Cmd::AdvanceTime { seconds } => (Op::AdvanceTime, json!({"seconds": seconds})),
            Cmd::SetUser { token_id, user, lease } => {
                (Op::SetUser, json!({"tokenId": token_id, "user": user, "leaseDurationSec": lease}))
            }
            Cmd::Start { token_id, duration, lease, beneficiary, price } => (
                Op::Start,
                json!({
                    "tokenId": token_id,
                    "auctionDurationSec": duration,
                    "leaseDurationSec": lease,
                    "beneficiary": beneficiary,
                    "startingPriceEther": price,
                }),
            ),
            Cmd::Bid { token_id, amount } => (Op::Bid, json!({"tokenId": token_id, "amountEther": amount})),
            Cmd::End { token_id } => (Op::End, json!({"tokenId": token_id})),
            Cmd::Withdraw { token_id } => (Op::Withdraw, json!({"tokenId": token_id})),
            Cmd::Idle => (Op::Idle, Value::Null),
            Cmd::Info { token_id } => (Op::Info, json!({"tokenId": token_id})),
            Cmd::Auction { token_id } => (Op::Auction, json!({"tokenId": token_id})),
            Cmd::Account { address } => (Op::Account, json!({"address": address})),
            Cmd::Accounts => (Op::Accounts, Value::Null),
            Cmd::Events { since } => (Op::Events, json!({"since": since})),
            Cmd::Health => (Op::Health, Value::Null),
            Cmd::StateHash => (Op::StateHash, Value::Null),
            Cmd::Run(_) | Cmd::VerifyJournal(_) => return None,
        })
    }
}

#[tokio::main(flavor = "current_thread")]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Cmd::Run(args) => run_scenario(&cli, args).await,
        Cmd::VerifyJournal(args) => verify(&cli, args),
        cmd => {
            let (op, params) = cmd.op().expect("direct command");
            direct(&cli, op, &params).await
        }
    }
}

fn client(cli: &Cli) -> Result<SpectrumClient, ExitCode> {
    let client = SpectrumClient::new(&cli.server).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(TRANSPORT_ERROR)
    })?;
    Ok(match cli.caller {
        Some(caller) => client.with_caller(caller),
        None => client,
    })
}

async fn direct(cli: &Cli, op: Op, params: &Value) -> ExitCode {
    let client = match client(cli) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let call = op.call(params).expect("subcommand builds valid params");
    match call.send(&client).await {
        Ok(data) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&data).expect("JSON value serializes"));
            } else {
                print!("{}", render::human(op, &data));
            }
            ExitCode::SUCCESS
        }
        Err(ClientError::Api { code, message, .. }) => {
            if cli.json {
                println!("{}", json!({"error": {"code": code, "message": message}}));
            } else {
                eprintln!("{code}: {message}");
            }
            ExitCode::from(ASSERTION_FAILED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(TRANSPORT_ERROR)
        }
    }
}

async fn run_scenario(cli: &Cli, args: &RunArgs) -> ExitCode {
    let client = match client(cli) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let scenario = match std::fs::read_to_string(&args.scenario) {
        Ok(text) => Scenario::parse(&text),
        Err(e) => Err(ScenarioError::Parse(format!("{}: {e}", args.scenario.display()))),
    };
    let report = match scenario {
        Ok(s) => scenario::run(&s, &client).await,
        Err(e) => Err(e),
    };
    match report {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.human());
            }
            if report.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(ASSERTION_FAILED)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(TRANSPORT_ERROR)
        }
    }
}

fn verify(cli: &Cli, args: &VerifyArgs) -> ExitCode {
    let genesis_path = args.genesis.clone().unwrap_or_else(|| {
        args.journal.parent().unwrap_or(std::path::Path::new(".")).join("genesis.json")
    });
    let result = load_genesis(&genesis_path).and_then(|g| verify_journal(&args.journal, &g));
    match result {
        Ok(v) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&v).expect("verification serializes"));
            } else {
                println!("valid: {} events, state hash {}", v.event_count, v.final_hash);
            }
            ExitCode::SUCCESS
        }
        Err(VerifyError::Invalid(e)) => {
            if cli.json {
                println!("{}", json!({"valid": false, "error": {"code": e.code(), "message": e.to_string()}}));
            } else {
                println!("invalid: {}: {e}", e.code());
            }
            ExitCode::from(ASSERTION_FAILED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(TRANSPORT_ERROR)
        }
    }
}
