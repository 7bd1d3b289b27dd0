//! Typed async client for the ledger service.
//!
//! ```no_run
//! # async fn demo() -> Result<(), spectrum_client::ClientError> {
//! let bidder = "0x17F6AD8Ef982297579C203069C1DbfFE4348c372".parse().unwrap();
//! let client = spectrum_client::SpectrumClient::new("http://127.0.0.1:8545")?.with_caller(bidder);
//! let auction = client.bid(1, "3.5").await?;
//! println!("highest bid {}", auction.highest_bid);
//! # Ok(()) }
//! ```

pub use reqwest::{Method, StatusCode};
use reqwest::Url;
use serde::de::DeserializeOwned;
use serde::Serialize;
use spectrum_core::api::*;
use spectrum_core::Address;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service answered with an error envelope.
    #[error("{code}: {message}")]
    Api { status: StatusCode, code: String, message: String },
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("unexpected response: {0}")]
    Decode(String),
    #[error("invalid server URL: {0}")]
    Url(String),
}

impl ClientError {
    /// The service's error code, if the service produced this error.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api { code, .. } => Some(code),
            _ => None,
        }
    }
}

/// A successful response together with the seq it was served at.
#[derive(Clone, Debug, PartialEq)]
pub struct Served<T> {
    pub seq: u64,
    pub data: T,
}

#[derive(Clone, Debug)]
pub struct SpectrumClient {
    http: reqwest::Client,
    base: Url,
    caller: Option<Address>,
}

impl SpectrumClient {
    pub fn new(base: &str) -> Result<Self, ClientError> {
        let mut base = Url::parse(base).map_err(|e| ClientError::Url(format!("{base}: {e}")))?;
        if !base.path().ends_with('/') {
            base.set_path(&format!("{}/", base.path()));
        }
        Ok(SpectrumClient { http: reqwest::Client::new(), base, caller: None })
    }

    /// Identity sent in the caller header on every request.
    pub fn with_caller(mut self, caller: Address) -> Self {
        self.caller = Some(caller);
        self
    }

    pub fn caller(&self) -> Option<Address> {
        self.caller
    }

    pub fn base_url(&self) -> &Url {
        &self.base
    }

    /// Sends a request and unwraps the envelope. Lower level than the typed
    /// methods; useful for driving arbitrary routes.
    pub async fn call<B: Serialize + ?Sized, T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&B>,
    ) -> Result<Served<T>, ClientError> {
        let url = self
            .base
            .join(path.trim_start_matches('/'))
            .map_err(|e| ClientError::Url(format!("{path}: {e}")))?;
        let mut request = self.http.request(method, url);
        if let Some(caller) = self.caller {
            request = request.header(CALLER_HEADER, caller.to_string());
        }
        if let Some(body) = body {
            request = request.json(body);
        }
        let response = request.send().await?;
        let status = response.status();
        let bytes = response.bytes().await?;
        let envelope: Envelope<T> = serde_json::from_slice(&bytes).map_err(|e| {
            ClientError::Decode(format!("HTTP {status}: {e}: {}", String::from_utf8_lossy(&bytes)))
        })?;
        match (envelope.ok, envelope.data, envelope.error) {
            (true, Some(data), _) => Ok(Served { seq: envelope.seq, data }),
            (false, _, Some(err)) => Err(ClientError::Api { status, code: err.code, message: err.message }),
            _ => Err(ClientError::Decode(format!("HTTP {status}: malformed envelope"))),
        }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        Ok(self.call::<(), T>(Method::GET, path, None).await?.data)
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, ClientError> {
        Ok(self.call(Method::POST, path, Some(body)).await?.data)
    }

    async fn post_empty<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        Ok(self.call::<(), T>(Method::POST, path, None).await?.data)
    }

    pub async fn mint(&self, req: &MintRequest) -> Result<MintResponse, ClientError> {
        self.post("admin/mint", req).await
    }

    pub async fn faucet(&self, to: Address, amount_ether: &str) -> Result<AccountResponse, ClientError> {
        self.post("admin/faucet", &FaucetRequest { to, amount_ether: amount_ether.to_string() })
            .await
    }

    pub async fn advance_time(&self, seconds: u64) -> Result<ClockResponse, ClientError> {
        self.post("admin/advance-time", &AdvanceTimeRequest { seconds }).await
    }

    pub async fn idle(&self) -> Result<IdleResponse, ClientError> {
        self.get("spectrum/idle").await
    }

    pub async fn token_info(&self, token_id: u64) -> Result<TokenInfoResponse, ClientError> {
        self.get(&format!("nfst/{token_id}")).await
    }

    pub async fn set_user(&self, token_id: u64, req: &SetUserRequest) -> Result<GrantResponse, ClientError> {
        self.post(&format!("nfst/{token_id}/user"), req).await
    }

    pub async fn start_auction(
        &self,
        token_id: u64,
        req: &StartAuctionRequest,
    ) -> Result<AuctionInfoResponse, ClientError> {
        self.post(&format!("auction/{token_id}/start"), req).await
    }

    pub async fn bid(&self, token_id: u64, amount_ether: &str) -> Result<AuctionInfoResponse, ClientError> {
        let body = BidRequest { amount_ether: amount_ether.to_string() };
        self.post(&format!("auction/{token_id}/bid"), &body).await
    }

    pub async fn end_auction(&self, token_id: u64) -> Result<SettlementResponse, ClientError> {
        self.post_empty(&format!("auction/{token_id}/end")).await
    }

    pub async fn withdraw(&self, token_id: u64) -> Result<WithdrawResponse, ClientError> {
        self.post_empty(&format!("auction/{token_id}/withdraw")).await
    }

    pub async fn auction_info(&self, token_id: u64) -> Result<AuctionInfoResponse, ClientError> {
        self.get(&format!("auction/{token_id}")).await
    }

    pub async fn accounts(&self) -> Result<AccountsResponse, ClientError> {
        self.get("accounts").await
    }

    pub async fn account(&self, address: Address) -> Result<AccountResponse, ClientError> {
        self.get(&format!("accounts/{address}")).await
    }

    pub async fn events(&self, since: u64) -> Result<EventsResponse, ClientError> {
        self.get(&format!("events?since={since}")).await
    }

    pub async fn health(&self) -> Result<HealthResponse, ClientError> {
        self.get("healthz").await
    }

    pub async fn state_hash(&self) -> Result<StateHashResponse, ClientError> {
        self.get("state-hash").await
    }
}
