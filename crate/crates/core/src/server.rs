//! HTTP/JSON interface with a server-sent event stream.
//!
//! | method | path                    | body / query                               |
//! |--------|-------------------------|--------------------------------------------|
//! | GET    | `/model`                | current model as JSON                      |
//! | GET    | `/view`                 | `kind`, `filter`, `show_stars`, `highlight`|
//! | GET    | `/lint`                 | findings                                   |
//! | POST   | `/sim/init`             | `{seed, dwell, max_events, monitored}`     |
//! | POST   | `/sim/step`             | one dequeued event batch                   |
//! | POST   | `/sim/run`              | `{until}`                                  |
//! | POST   | `/sim/inject`           | `{event}`                                  |
//! | GET    | `/events`               | trace so far, then live events             |
//! | POST   | `/model/elements`       | an element to add                          |
//! | DELETE | `/model/elements/{id}`  | delete with cascade                        |
//!
//! Requests run one at a time against a single model. While a simulation has
//! pending events, edits answer 409; an edit after the run discards it.

use std::convert::Infallible;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast;

use crate::export::view_json;
use crate::kernel::{init_sim, ExternalEvent, KernelError, SimConfig, SimState, Trace, TraceEvent};
use crate::lint::lint;
use crate::model::{ArcId, CircleId, DotKind, IdentityId, Model, ModelError, NodeId, RelationKind};
use crate::pilots::{bind_service, Instruction, ServiceError};
use crate::topology::{classify, project, ViewFilter, ViewKind};

const EVENT_BUFFER: usize = 4096;

struct AppState {
    model: Model,
    sim: Option<SimState>,
    events: broadcast::Sender<TraceEvent>,
}

type Shared = Arc<Mutex<AppState>>;

/// An error answered with a status code and `{"error", "message"}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            kind,
            message: message.into(),
        }
    }

    fn bad(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid", message)
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.kind, "message": self.message })),
        )
            .into_response()
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        let status = match e {
            ModelError::UnknownNode(_)
            | ModelError::UnknownIdentity(_)
            | ModelError::UnknownCircle(_)
            | ModelError::UnknownStar(_)
            | ModelError::UnknownArc(_)
            | ModelError::UnknownRelation(_)
            | ModelError::UnknownService(_)
            | ModelError::UnknownElement(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        let kind = if status == StatusCode::NOT_FOUND {
            "not_found"
        } else {
            "invalid"
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Model(m) => m.into(),
            other => ApiError::bad(other.to_string()),
        }
    }
}

impl From<KernelError> for ApiError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Model(m) => m.into(),
            KernelError::UnknownToken(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "not_found", e.to_string())
            }
            KernelError::FlowConflict(_) | KernelError::Truncated { .. } => {
                ApiError::conflict(e.to_string())
            }
            other => ApiError::bad(other.to_string()),
        }
    }
}

/// JSON body extractor whose rejections use the API error shape.
struct Body<T>(T);

impl<S, T> axum::extract::FromRequest<S> for Body<T>
where
    T: serde::de::DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, ApiError> {
        let bytes = axum::body::Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::bad(e.to_string()))?;
        let text = if bytes.iter().all(|b| b.is_ascii_whitespace()) {
            &b"{}"[..]
        } else {
            &bytes[..]
        };
        serde_json::from_slice(text)
            .map(Body)
            .map_err(|e| ApiError::bad(e.to_string()))
    }
}

/// Routes over a server holding `model`.
pub fn router(model: Model) -> Router {
    let (events, _) = broadcast::channel(EVENT_BUFFER);
    let state: Shared = Arc::new(Mutex::new(AppState {
        model,
        sim: None,
        events,
    }));
    Router::new()
        .route("/model", get(get_model))
        .route("/view", get(get_view))
        .route("/lint", get(get_lint))
        .route("/sim/init", post(sim_init))
        .route("/sim/step", post(sim_step))
        .route("/sim/run", post(sim_run))
        .route("/sim/inject", post(sim_inject))
        .route("/events", get(event_stream))
        .route("/model/elements", post(add_element))
        .route("/model/elements/{id}", delete(delete_element))
        .with_state(state)
}

/// Serve `model` on `port` until the process stops.
pub async fn serve(model: Model, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(model)).await
}

fn lock(state: &Shared) -> std::sync::MutexGuard<'_, AppState> {
    state.lock().unwrap_or_else(|p| p.into_inner())
}

impl AppState {
    /// The model as the simulation left it, or the authored model.
    fn current(&self) -> &Model {
        match &self.sim {
            Some(sim) => sim.model(),
            None => &self.model,
        }
    }

    fn sim_mut(&mut self) -> Result<&mut SimState, ApiError> {
        self.sim
            .as_mut()
            .ok_or_else(|| ApiError::conflict("no simulation; POST /sim/init first"))
    }
}

async fn get_model(State(state): State<Shared>) -> Json<Value> {
    let st = lock(&state);
    Json(serde_json::to_value(st.current()).expect("model serializes"))
}

#[derive(Debug, Deserialize)]
struct ViewQuery {
    #[serde(default)]
    kind: Option<String>,
    /// Comma-separated globs to hide.
    #[serde(default)]
    filter: Option<String>,
    #[serde(default)]
    show_stars: Option<bool>,
    /// Comma-separated node ids to highlight.
    #[serde(default)]
    highlight: Option<String>,
}

async fn get_view(
    State(state): State<Shared>,
    query: Result<Query<ViewQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::bad(e.to_string()))?;
    let kind = match q.kind.as_deref() {
        None => ViewKind::Merged,
        Some(k) => {
            ViewKind::parse(k).ok_or_else(|| ApiError::bad(format!("unknown view kind {k:?}")))?
        }
    };
    let mut filter = ViewFilter {
        show_stars: q.show_stars.unwrap_or(false),
        ..ViewFilter::default()
    };
    for g in q
        .filter
        .iter()
        .flat_map(|f| f.split(','))
        .filter(|g| !g.is_empty())
    {
        filter.hide.push(g.to_owned());
    }
    for h in q
        .highlight
        .iter()
        .flat_map(|f| f.split(','))
        .filter(|h| !h.is_empty())
    {
        let id = h
            .parse::<u64>()
            .map_err(|_| ApiError::bad(format!("highlight {h:?} is not an id")))?;
        filter.highlight.insert(NodeId(id));
    }
    let st = lock(&state);
    let model = st.current();
    let view = project(model, kind, &filter);
    let body = view_json(model, &view, &classify(model));
    Ok(Json(serde_json::to_value(body).expect("view serializes")))
}

async fn get_lint(State(state): State<Shared>) -> Json<Value> {
    let st = lock(&state);
    Json(serde_json::to_value(lint(&st.model)).expect("findings serialize"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitBody {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    dwell: Option<u64>,
    #[serde(default)]
    max_events: Option<u64>,
    #[serde(default)]
    monitored: bool,
}

async fn sim_init(
    State(state): State<Shared>,
    Body(body): Body<InitBody>,
) -> Result<Json<Value>, ApiError> {
    let mut config = SimConfig::default();
    if let Some(s) = body.seed {
        config.seed = s;
    }
    if let Some(d) = body.dwell {
        config.default_dwell = d;
    }
    if let Some(m) = body.max_events {
        config.max_events = m;
    }
    if body.monitored {
        config = config.monitored();
    }
    let mut st = lock(&state);
    let mut sim = init_sim(st.model.clone(), config)?;
    let tx = st.events.clone();
    sim.subscribe(move |e| {
        let _ = tx.send(e.clone());
    });
    let tokens = sim.tokens().count();
    let pending = sim.pending();
    st.sim = Some(sim);
    Ok(Json(
        json!({ "tokens": tokens, "pending": pending, "clock": 0 }),
    ))
}

async fn sim_step(State(state): State<Shared>) -> Result<Json<Value>, ApiError> {
    let mut st = lock(&state);
    let sim = st.sim_mut()?;
    let batch = sim.step()?;
    Ok(Json(json!({
        "done": batch.is_none(),
        "events": batch.unwrap_or_default(),
        "clock": sim.clock(),
        "pending": sim.pending(),
    })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunBody {
    #[serde(default)]
    until: Option<u64>,
}

async fn sim_run(
    State(state): State<Shared>,
    Body(body): Body<RunBody>,
) -> Result<Json<Value>, ApiError> {
    let mut st = lock(&state);
    let sim = st.sim_mut()?;
    let before = sim.trace().len();
    let result = sim.run(body.until).map(|_| ());
    let events: Vec<TraceEvent> = sim.trace().events()[before..].to_vec();
    let (clock, pending) = (sim.clock(), sim.pending());
    match result {
        Ok(()) => Ok(Json(json!({
            "events": events,
            "clock": clock,
            "pending": pending,
        }))),
        Err(KernelError::Truncated { limit, .. }) => Err(ApiError::conflict(format!(
            "run stopped after {limit} events with work pending"
        ))),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InjectBody {
    event: ExternalEvent,
}

async fn sim_inject(
    State(state): State<Shared>,
    Body(body): Body<InjectBody>,
) -> Result<Json<Value>, ApiError> {
    let mut st = lock(&state);
    let sim = st.sim_mut()?;
    sim.inject(body.event)?;
    Ok(Json(json!({ "pending": sim.pending() })))
}

fn sse_event(e: &TraceEvent) -> Event {
    Event::default()
        .event(e.kind.as_str())
        .id(e.seq.to_string())
        .data(e.to_json())
}

async fn event_stream(
    State(state): State<Shared>,
) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    // Snapshot and subscribe under one lock so no event falls in between.
    let (past, rx) = {
        let st = lock(&state);
        let past: Trace = st
            .sim
            .as_ref()
            .map(|s| s.trace().clone())
            .unwrap_or_default();
        (past, st.events.subscribe())
    };
    let replay = stream::iter(past.events().to_vec()).map(|e| Ok(sse_event(&e)));
    let live = stream::unfold(rx, |mut rx| async move {
        match rx.recv().await {
            Ok(e) => Some((Ok(sse_event(&e)), rx)),
            Err(broadcast::error::RecvError::Lagged(n)) => Some((
                Ok(Event::default()
                    .event("lagged")
                    .data(json!({ "skipped": n }).to_string())),
                rx,
            )),
            Err(broadcast::error::RecvError::Closed) => None,
        }
    });
    Sse::new(replay.chain(live)).keep_alive(KeepAlive::default())
}

/// An element to add through `POST /model/elements`.
#[derive(Debug, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case")]
enum NewElement {
    Node {
        name: String,
        #[serde(default)]
        dot_kind: Option<DotKind>,
        #[serde(default)]
        frame: Option<NodeId>,
    },
    Circle {
        owner: NodeId,
        name: String,
    },
    Star {
        identity: IdentityId,
        circle: CircleId,
    },
    Arc {
        from: NodeId,
        to: NodeId,
    },
    Dot {
        arc: ArcId,
        node: NodeId,
        #[serde(default)]
        position: Option<usize>,
    },
    Attribute {
        node: NodeId,
        name: String,
        value: String,
    },
    Relation {
        #[serde(flatten)]
        kind: RelationKind,
        #[serde(default)]
        multiplicity: Option<String>,
    },
    Service {
        pilot: IdentityId,
        target: NodeId,
        instructions: Vec<Instruction>,
    },
}

fn apply(model: &mut Model, element: NewElement) -> Result<u64, ApiError> {
    Ok(match element {
        NewElement::Node {
            name,
            dot_kind,
            frame,
        } => {
            if let Some(f) = frame {
                model.node(f)?;
            }
            let id = model.add_node(&name, dot_kind)?;
            if frame.is_some() {
                model.set_frame(id, frame)?;
            }
            id.0
        }
        NewElement::Circle { owner, name } => model.add_circle(owner, &name)?.0,
        NewElement::Star { identity, circle } => model.place_star(identity, circle)?.0,
        NewElement::Arc { from, to } => model.connect_arc(from, to)?.0,
        NewElement::Dot {
            arc,
            node,
            position,
        } => {
            match position {
                Some(p) => model.insert_dot(arc, node, p)?,
                None => model.push_dot(arc, node)?,
            }
            node.0
        }
        NewElement::Attribute { node, name, value } => {
            model.set_attribute(node, &name, &value)?;
            node.0
        }
        NewElement::Relation { kind, multiplicity } => {
            model.add_relation(kind, multiplicity.as_deref())?.0
        }
        NewElement::Service {
            pilot,
            target,
            instructions,
        } => bind_service(model, pilot, target, instructions)?.0,
    })
}

fn ensure_editable(st: &AppState) -> Result<(), ApiError> {
    match &st.sim {
        Some(sim) if !sim.is_idle() => Err(ApiError::conflict(
            "a simulation is running; edits are rejected until it completes",
        )),
        _ => Ok(()),
    }
}

async fn add_element(
    State(state): State<Shared>,
    Body(element): Body<NewElement>,
) -> Result<Response, ApiError> {
    let mut st = lock(&state);
    ensure_editable(&st)?;
    // Edits are all-or-nothing: work on a copy and commit on success.
    let mut model = st.model.clone();
    let id = apply(&mut model, element)?;
    st.model = model;
    st.sim = None;
    let findings = lint(&st.model);
    Ok((
        StatusCode::CREATED,
        Json(json!({ "id": id, "findings": findings })),
    )
        .into_response())
}

async fn delete_element(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let id: u64 = id
        .parse()
        .map_err(|_| ApiError::bad(format!("{id:?} is not an element id")))?;
    let mut st = lock(&state);
    ensure_editable(&st)?;
    let removed = st.model.delete(id)?;
    st.sim = None;
    let findings = lint(&st.model);
    Ok(Json(json!({ "removed": removed, "findings": findings })))
}
