//! HTTP API over one editing session.
//!
//! | method | path                      | body / result                                  |
//! |--------|---------------------------|------------------------------------------------|
//! | GET    | `/meta`                   | stream header, bitrate, edit log               |
//! | GET    | `/frames/{l}/semantics`   | edited semantics of frame `l`                  |
//! | GET    | `/edits`                  | edit log                                       |
//! | POST   | `/edits`                  | an `EditOp`; returns its index in the log      |
//! | DELETE | `/edits/{k}`              | removes edit `k`, later edits shift down       |
//! | GET    | `/frames/{l}/mesh`        | projected vertices, triangles, eye outlines    |
//! | GET    | `/frames/{l}/preview.png` | warped key image; `?view=wireframe` for edges  |
//! | POST   | `/key`                    | multipart `image` (+ optional `semantics`)     |
//! | DELETE | `/key`                    | back to the stream's own key                   |
//! | POST   | `/export`                 | `.ifvc` bytes, or `{"path"}` to write a file   |
//!
//! Errors are JSON `{"error": kind, "message": text}`. Reads share the
//! session lock; edits, key changes and exports take it exclusively.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use ifvc::interact::Session;
use ifvc::motion::render_wireframe;
use ifvc::trace_io::key_from_json;
use ifvc::{EditOp, Error, MorphableModel, PreviewFrame};

use crate::view::{FrameSemantics, MeshView, Meta};

pub struct AppState {
    pub session: RwLock<Session>,
    pub model: MorphableModel,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn shared(session: Session, model: MorphableModel) -> SharedState {
        Arc::new(Self {
            session: RwLock::new(session),
            model,
        })
    }
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/meta", get(meta))
        .route("/frames/{l}/semantics", get(frame_semantics))
        .route("/frames/{l}/mesh", get(frame_mesh))
        .route("/frames/{l}/preview.png", get(frame_preview))
        .route("/edits", get(list_edits).post(add_edit))
        .route("/edits/{k}", delete(remove_edit))
        .route("/key", post(substitute_key).delete(restore_key))
        .route("/export", post(export))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "request", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            Error::Degenerate(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.kind(), e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.kind,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn check_frame(session: &Session, l: usize) -> ApiResult<()> {
    if l < session.frame_count() {
        Ok(())
    } else {
        Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "range",
            format!("frame {l} outside 0..{}", session.frame_count()),
        ))
    }
}

/// Runs CPU-bound work off the async workers under a shared session lock.
async fn with_session<T: Send + 'static>(
    state: SharedState,
    f: impl FnOnce(&Session, &MorphableModel) -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(move || {
        let session = state.session.blocking_read();
        f(&session, &state.model)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn meta(State(state): State<SharedState>) -> ApiResult<Json<Meta>> {
    let session = state.session.read().await;
    Ok(Json(Meta::new(&session)?))
}

async fn frame_semantics(
    State(state): State<SharedState>,
    Path(l): Path<usize>,
) -> ApiResult<Json<FrameSemantics>> {
    let session = state.session.read().await;
    check_frame(&session, l)?;
    Ok(Json(FrameSemantics::new(l, session.frame(l)?)))
}

async fn frame_mesh(State(state): State<SharedState>, Path(l): Path<usize>) -> ApiResult<Json<MeshView>> {
    with_session(state, move |session, model| {
        check_frame(session, l)?;
        Ok(Json(MeshView::for_frame(session, l, model)?))
    })
    .await
}

#[derive(Debug, Default, Deserialize)]
struct PreviewQuery {
    view: Option<String>,
}

async fn frame_preview(
    State(state): State<SharedState>,
    Path(l): Path<usize>,
    Query(q): Query<PreviewQuery>,
) -> ApiResult<Response> {
    let png = with_session(state, move |session, model| {
        check_frame(session, l)?;
        let frame = match q.view.as_deref() {
            None | Some("warp") => session.preview(l, model)?.frame,
            Some("wireframe") => {
                let geom = session.frame_geometry(l, model)?;
                let cam = session.camera();
                render_wireframe(
                    geom.mesh(),
                    &model.triangles,
                    &geom.eyes.map,
                    (cam.width, cam.height),
                )
            }
            Some(other) => return Err(ApiError::bad_request(format!("unknown view `{other}`"))),
        };
        Ok(frame.to_png()?)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn list_edits(State(state): State<SharedState>) -> Json<Vec<EditOp>> {
    Json(state.session.read().await.edits().to_vec())
}

#[derive(Serialize)]
struct EditAdded {
    index: usize,
    edit: EditOp,
}

async fn add_edit(
    State(state): State<SharedState>,
    Json(op): Json<EditOp>,
) -> ApiResult<(StatusCode, Json<EditAdded>)> {
    let mut session = state.session.write().await;
    session.apply_edit(op)?;
    let index = session.edits().len() - 1;
    Ok((StatusCode::CREATED, Json(EditAdded { index, edit: op })))
}

#[derive(Serialize)]
struct EditRemoved {
    removed: EditOp,
    remaining: Vec<EditOp>,
}

async fn remove_edit(State(state): State<SharedState>, Path(k): Path<usize>) -> ApiResult<Json<EditRemoved>> {
    let mut session = state.session.write().await;
    if k >= session.edits().len() {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "range",
            format!("no edit {k}, log has {}", session.edits().len()),
        ));
    }
    let removed = session.remove_edit(k)?;
    Ok(Json(EditRemoved {
        removed,
        remaining: session.edits().to_vec(),
    }))
}

/// Multipart fields: `image` holds the portrait (PNG), `semantics` an
/// optional key-semantics JSON document. Without `semantics` the stream's
/// own key semantics are kept.
async fn substitute_key(State(state): State<SharedState>, mut form: Multipart) -> ApiResult<Json<Meta>> {
    let mut image: Option<Bytes> = None;
    let mut semantics: Option<Bytes> = None;
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(e.body_text()))?
    {
        let name = field.name().unwrap_or_default().to_owned();
        let data = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        match name.as_str() {
            "image" => image = Some(data),
            "semantics" => semantics = Some(data),
            other => return Err(ApiError::bad_request(format!("unexpected field `{other}`"))),
        }
    }
    let image = image.ok_or_else(|| ApiError::bad_request("missing `image` field"))?;
    let frame = PreviewFrame::decode(&image)?;

    let mut session = state.session.write().await;
    let key = match semantics {
        Some(raw) => {
            let doc: serde_json::Value =
                serde_json::from_slice(&raw).map_err(|e| ApiError::bad_request(format!("semantics: {e}")))?;
            let (mut key, pose) = key_from_json(&doc)?;
            key.pose = pose.unwrap_or(session.key_semantics().pose);
            key
        }
        None => session.stream().key_semantics.clone(),
    };
    session.substitute_key(frame, key)?;
    Ok(Json(Meta::new(&session)?))
}

async fn restore_key(State(state): State<SharedState>) -> ApiResult<Json<Meta>> {
    let mut session = state.session.write().await;
    session.restore_key();
    Ok(Json(Meta::new(&session)?))
}

#[derive(Debug, Default, Deserialize)]
struct ExportRequest {
    path: Option<PathBuf>,
}

#[derive(Serialize)]
struct Exported {
    path: PathBuf,
    bytes: usize,
}

/// With a JSON body naming a `path` the stream is written there; otherwise
/// the encoded bytes are returned.
async fn export(State(state): State<SharedState>, body: Bytes) -> ApiResult<Response> {
    let req: ExportRequest = if body.is_empty() {
        ExportRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("export: {e}")))?
    };
    let session = state.session.write().await;
    let stream = session.export_stream()?;
    match req.path {
        Some(path) => {
            let bytes = stream.to_bytes();
            std::fs::write(&path, &bytes).map_err(Error::from)?;
            Ok(Json(Exported {
                path,
                bytes: bytes.len(),
            })
            .into_response())
        }
        None => Ok((
            [(header::CONTENT_TYPE, "application/octet-stream")],
            stream.to_bytes(),
        )
            .into_response()),
    }
}

/// Serves `state` on `127.0.0.1:port` until the process is stopped.
pub async fn serve(state: SharedState, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
