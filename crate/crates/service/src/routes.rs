//! HTTP routes. Every response body is an [`Envelope`].
//!
//! Status codes: 400 malformed input, 401 missing or malformed caller header,
//! 404 unknown route, token or auction, 409 any other rejected command, 500
//! journal failure.

use std::path::Path;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path as UrlPath, Query, Request, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use spectrum_core::api::*;
use spectrum_core::{Address, Applied, Command, CommandError, FrequencyMhz, Ledger, Outcome, TokenId, Wei};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::{Engine, EngineError};

pub fn router(engine: Engine, ui_dir: Option<&Path>) -> Router {
    let mut router = Router::new()
        .route("/admin/mint", post(mint))
        .route("/admin/faucet", post(faucet))
        .route("/admin/advance-time", post(advance_time))
        .route("/spectrum/idle", get(idle))
        .route("/nfst/{token_id}", get(token_info))
        .route("/nfst/{token_id}/user", post(set_user))
        .route("/auction/{token_id}", get(auction_info))
        .route("/auction/{token_id}/start", post(start_auction))
        .route("/auction/{token_id}/bid", post(bid))
        .route("/auction/{token_id}/end", post(end_auction))
        .route("/auction/{token_id}/withdraw", post(withdraw))
        .route("/accounts", get(accounts))
        .route("/accounts/{address}", get(account))
        .route("/events", get(events))
        .route("/healthz", get(health))
        .route("/state-hash", get(state_hash))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed);
    if let Some(dir) = ui_dir {
        router = router.nest_service("/ui", ServeDir::new(dir));
    }
    router.layer(CorsLayer::permissive()).with_state(engine)
}

/// A successful response: `data` plus the seq it was read or written at.
struct Reply<T> {
    seq: u64,
    data: T,
}

impl<T: Serialize> IntoResponse for Reply<T> {
    fn into_response(self) -> Response {
        let body = Envelope { ok: true, seq: self.seq, data: Some(self.data), error: None };
        (StatusCode::OK, Json(body)).into_response()
    }
}

struct Failure {
    status: StatusCode,
    seq: u64,
    error: ApiError,
}

impl Failure {
    fn new(engine: &Engine, status: StatusCode, code: &str, message: impl Into<String>) -> Failure {
        Failure {
            status,
            seq: engine.read(|l| l.state().last_seq()),
            error: ApiError { code: code.to_string(), message: message.into() },
        }
    }

    fn malformed(engine: &Engine, message: impl Into<String>) -> Failure {
        Failure::new(engine, StatusCode::BAD_REQUEST, "MalformedRequest", message)
    }

    fn command(engine: &Engine, err: CommandError) -> Failure {
        Failure::engine(engine, EngineError::Command(err))
    }

    fn engine(engine: &Engine, err: EngineError) -> Failure {
        let status = match &err {
            EngineError::Command(CommandError::UnknownToken(_) | CommandError::NoAuction(_)) => StatusCode::NOT_FOUND,
            EngineError::Command(CommandError::Internal(_)) | EngineError::Persistence(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            EngineError::Command(_) => StatusCode::CONFLICT,
            EngineError::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
        };
        Failure::new(engine, status, err.code(), err.to_string())
    }

    fn unexpected(engine: &Engine, outcome: Outcome) -> Failure {
        let err = CommandError::Internal(format!("unexpected outcome {outcome:?}"));
        Failure::command(engine, err)
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let body: Envelope<()> = Envelope { ok: false, seq: self.seq, data: None, error: Some(self.error) };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Reply<T>, Failure>;

/// The address from the caller header. Required on every mutating route.
struct Caller(Address);

impl FromRequestParts<Engine> for Caller {
    type Rejection = Failure;

    async fn from_request_parts(parts: &mut Parts, engine: &Engine) -> Result<Self, Failure> {
        let Some(value) = parts.headers.get(CALLER_HEADER) else {
            return Err(Failure::new(
                engine,
                StatusCode::UNAUTHORIZED,
                "MissingCaller",
                format!("{CALLER_HEADER} header is required"),
            ));
        };
        value
            .to_str()
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Caller)
            .ok_or_else(|| {
                Failure::new(
                    engine,
                    StatusCode::UNAUTHORIZED,
                    "InvalidCaller",
                    format!("{CALLER_HEADER} must be 0x followed by 40 hex digits"),
                )
            })
    }
}

/// JSON body with rejections rendered as envelopes.
struct Body<T>(T);

impl<T: DeserializeOwned> FromRequest<Engine> for Body<T> {
    type Rejection = Failure;

    async fn from_request(req: Request, engine: &Engine) -> Result<Self, Failure> {
        match Json::<T>::from_request(req, engine).await {
            Ok(Json(value)) => Ok(Body(value)),
            Err(rejection) => Err(json_failure(engine, rejection)),
        }
    }
}

fn json_failure(engine: &Engine, rejection: JsonRejection) -> Failure {
    Failure::malformed(engine, rejection.body_text())
}

/// Path parameter with rejections rendered as envelopes.
struct Param<T>(T);

impl<T: DeserializeOwned + Send> FromRequestParts<Engine> for Param<T> {
    type Rejection = Failure;

    async fn from_request_parts(parts: &mut Parts, engine: &Engine) -> Result<Self, Failure> {
        UrlPath::<T>::from_request_parts(parts, engine)
            .await
            .map(|UrlPath(v)| Param(v))
            .map_err(|e: PathRejection| Failure::malformed(engine, e.body_text()))
    }
}

fn ether(engine: &Engine, field: &str, raw: &str) -> Result<Wei, Failure> {
    Wei::parse_ether(raw).map_err(|e| {
        Failure::new(engine, StatusCode::BAD_REQUEST, "InvalidAmount", format!("{field}: {e}"))
    })
}

async fn submit(engine: &Engine, command: Command) -> Result<Applied, Failure> {
    engine.submit(command).await.map_err(|e| Failure::engine(engine, e))
}

fn read<T>(engine: &Engine, f: impl FnOnce(&Ledger) -> Result<T, CommandError>) -> ApiResult<T> {
    engine
        .read(|l| f(l).map(|data| Reply { seq: l.state().last_seq(), data }))
        .map_err(|e| Failure::command(engine, e))
}

async fn mint(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Body(req): Body<MintRequest>,
) -> ApiResult<MintResponse> {
    let command = Command::Mint {
        caller,
        owner: req.owner,
        start_freq: FrequencyMhz(req.start_freq_mhz),
        end_freq: FrequencyMhz(req.end_freq_mhz),
        geo_location: req.geo_location,
    };
    let applied = submit(&engine, command).await?;
    match applied.outcome {
        Outcome::Minted(ids) => Ok(Reply {
            seq: applied.last_seq,
            data: MintResponse { token_ids: ids.into_iter().map(|t| t.0).collect() },
        }),
        other => Err(Failure::unexpected(&engine, other)),
    }
}

async fn faucet(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Body(req): Body<FaucetRequest>,
) -> ApiResult<AccountResponse> {
    let amount = ether(&engine, "amountEther", &req.amount_ether)?;
    let applied = submit(&engine, Command::Faucet { caller, to: req.to, amount }).await?;
    let data = engine.read(|l| AccountResponse::new(req.to, l.state().account(req.to)));
    Ok(Reply { seq: applied.last_seq, data })
}

async fn advance_time(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Body(req): Body<AdvanceTimeRequest>,
) -> ApiResult<ClockResponse> {
    let applied = submit(&engine, Command::AdvanceTime { caller, seconds: req.seconds }).await?;
    match applied.outcome {
        Outcome::Clock(now) => Ok(Reply { seq: applied.last_seq, data: ClockResponse { now } }),
        other => Err(Failure::unexpected(&engine, other)),
    }
}

async fn idle(State(engine): State<Engine>) -> ApiResult<IdleResponse> {
    read(&engine, |l| {
        Ok(IdleResponse { idle: l.state().list_idle().into_iter().map(IdleEntry::from).collect() })
    })
}

async fn token_info(State(engine): State<Engine>, Param(id): Param<u64>) -> ApiResult<TokenInfoResponse> {
    read(&engine, |l| l.token_info(TokenId(id)).map(TokenInfoResponse::from))
}

async fn set_user(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Param(id): Param<u64>,
    Body(req): Body<SetUserRequest>,
) -> ApiResult<GrantResponse> {
    let command = Command::SetUser {
        caller,
        token_id: TokenId(id),
        user: req.user,
        lease_duration: req.lease_duration_sec,
    };
    let applied = submit(&engine, command).await?;
    match applied.outcome {
        Outcome::Grant(grant) => Ok(Reply { seq: applied.last_seq, data: grant.into() }),
        other => Err(Failure::unexpected(&engine, other)),
    }
}

async fn auction_info(State(engine): State<Engine>, Param(id): Param<u64>) -> ApiResult<AuctionInfoResponse> {
    read(&engine, |l| l.state().auction_info(TokenId(id)).map(AuctionInfoResponse::from))
}

fn auction_reply(engine: &Engine, applied: Applied) -> ApiResult<AuctionInfoResponse> {
    match applied.outcome {
        Outcome::Auction(view) => Ok(Reply { seq: applied.last_seq, data: view.into() }),
        other => Err(Failure::unexpected(engine, other)),
    }
}

async fn start_auction(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Param(id): Param<u64>,
    Body(req): Body<StartAuctionRequest>,
) -> ApiResult<AuctionInfoResponse> {
    let starting_price = ether(&engine, "startingPriceEther", &req.starting_price_ether)?;
    let command = Command::StartAuction {
        caller,
        token_id: TokenId(id),
        auction_duration: req.auction_duration_sec,
        lease_duration: req.lease_duration_sec,
        beneficiary: req.beneficiary,
        starting_price,
    };
    let applied = submit(&engine, command).await?;
    auction_reply(&engine, applied)
}

async fn bid(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Param(id): Param<u64>,
    Body(req): Body<BidRequest>,
) -> ApiResult<AuctionInfoResponse> {
    let amount = ether(&engine, "amountEther", &req.amount_ether)?;
    let applied = submit(&engine, Command::Bid { caller, token_id: TokenId(id), amount }).await?;
    auction_reply(&engine, applied)
}

async fn end_auction(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Param(id): Param<u64>,
) -> ApiResult<SettlementResponse> {
    let applied = submit(&engine, Command::EndAuction { caller, token_id: TokenId(id) }).await?;
    match applied.outcome {
        Outcome::Settlement(s) => Ok(Reply { seq: applied.last_seq, data: s.into() }),
        other => Err(Failure::unexpected(&engine, other)),
    }
}

async fn withdraw(
    State(engine): State<Engine>,
    Caller(caller): Caller,
    Param(id): Param<u64>,
) -> ApiResult<WithdrawResponse> {
    let applied = submit(&engine, Command::Withdraw { caller, token_id: TokenId(id) }).await?;
    match applied.outcome {
        Outcome::Refunded(amount) => Ok(Reply {
            seq: applied.last_seq,
            data: WithdrawResponse { refunded: amount.to_ether_string() },
        }),
        other => Err(Failure::unexpected(&engine, other)),
    }
}

async fn accounts(State(engine): State<Engine>) -> ApiResult<AccountsResponse> {
    read(&engine, |l| {
        let accounts = l.state().accounts().map(|(a, acct)| AccountResponse::new(*a, Some(acct))).collect();
        Ok(AccountsResponse { accounts })
    })
}

async fn account(State(engine): State<Engine>, Param(address): Param<String>) -> ApiResult<AccountResponse> {
    let address: Address = address
        .parse()
        .map_err(|e| Failure::malformed(&engine, format!("address: {e}")))?;
    read(&engine, |l| Ok(AccountResponse::new(address, l.state().account(address))))
}

#[derive(Deserialize)]
struct Since {
    #[serde(default)]
    since: u64,
}

async fn events(State(engine): State<Engine>, query: Result<Query<Since>, QueryRejection>) -> ApiResult<EventsResponse> {
    let Query(Since { since }) = query.map_err(|e| Failure::malformed(&engine, e.body_text()))?;
    read(&engine, |l| Ok(EventsResponse { events: l.events_since(since).to_vec() }))
}

async fn health(State(engine): State<Engine>) -> ApiResult<HealthResponse> {
    read(&engine, |l| {
        Ok(HealthResponse {
            status: "ok".into(),
            now: l.observed_time(),
            clock_mode: l.genesis().clock_mode,
            sma_address: l.genesis().sma_address,
        })
    })
}

async fn state_hash(State(engine): State<Engine>) -> ApiResult<StateHashResponse> {
    read(&engine, |l| Ok(StateHashResponse { state_hash: l.state_hash(), last_seq: l.state().last_seq() }))
}

async fn not_found(State(engine): State<Engine>) -> Failure {
    Failure::new(&engine, StatusCode::NOT_FOUND, "NotFound", "no such route")
}

async fn method_not_allowed(State(engine): State<Engine>) -> Failure {
    Failure::new(&engine, StatusCode::METHOD_NOT_ALLOWED, "MethodNotAllowed", "method not allowed on this route")
}
