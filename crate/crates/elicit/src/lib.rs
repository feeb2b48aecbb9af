//! Preference elicitation over HTTP: a person (or a scripted oracle) acts as
//! the preference function, choosing among posterior samples each episode.
//!
//! | method | path                                   | body / query            |
//! |--------|----------------------------------------|-------------------------|
//! | POST   | `/sessions`                            | [`SessionConfig`]       |
//! | GET    | `/sessions/{id}/options?front_only=b`  |                         |
//! | POST   | `/sessions/{id}/choice`                | `{"index", "episode"?}` |
//! | POST   | `/sessions/{id}/advance`               | `{"steps"?}`            |
//! | GET    | `/sessions/{id}/history`               |                         |
//! | GET    | `/healthz`                             |                         |

mod error;
mod http;
mod manager;
mod session;
mod store;

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

pub use error::ServiceError;
pub use http::router;
pub use manager::SessionManager;
pub use session::{
    ChoiceResult, History, HistoryEntry, Mode, OptionItem, Presentation, Session, SessionConfig, Status, Summary,
};
pub use store::{Record, Store};

/// Serves until ctrl-c. Sessions persist to `store` when given.
pub async fn serve(addr: SocketAddr, store: Option<&Path>) -> Result<(), ServiceError> {
    let manager = match store {
        Some(path) => SessionManager::open(path)?,
        None => SessionManager::in_memory(),
    };
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::Internal(format!("bind {addr}: {e}")))?;
    axum::serve(listener, router(Arc::new(manager)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))
}
