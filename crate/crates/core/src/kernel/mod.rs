//! Event-driven token simulation.
//!
//! Tokens are created from flow bindings: every identity in a bound circle
//! becomes a token that crosses the bound arc at time zero. Crossing an arc
//! follows its dots:
//!
//! | dots on the arc        | source star | target star | token      |
//! |------------------------|-------------|-------------|------------|
//! | none or label dots     | removed     | created     | moves      |
//! | rounded dot            | kept        | created     | moves      |
//! | gate                   | removed     | none        | finished   |
//! | rounded dot then gate  | kept        | none        | finished   |
//!
//! The target star goes into the node's circle named `place`, created on the
//! first arrival when the node has none. On arrival the responsible pilot's
//! service runs to completion and its terminal instruction picks the next
//! arc, crossed after the dwell time.
//!
//! With [`Drive::Monitored`] the kernel never advances tokens by itself:
//! creations and crossings arrive through [`SimState::inject`], typically
//! mirrored from a productive system, and the services still run on arrival.

mod trace;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use trace::{EventKind, StarCause, TokenId, Trace, TraceEvent};

use crate::model::{
    ArcId, CircleId, DotKind, IdentityId, Model, ModelError, NodeId, RelationId, RelationKind,
    StarId,
};
use crate::pilots::{self, Outcome};
use crate::topology::{self, FlowConflict, ProcessId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    Simulated,
    /// Sleep between events so that one tick lasts `time_unit`.
    Realtime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    Autonomous,
    Monitored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: ClockMode,
    pub drive: Drive,
    pub time_unit: Duration,
    /// Ticks a token stays at a node before its next crossing.
    pub default_dwell: u64,
    /// Recorded for reproducibility. Nothing in the current instruction set
    /// draws random numbers.
    pub seed: u64,
    pub max_events: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: ClockMode::Simulated,
            drive: Drive::Autonomous,
            time_unit: Duration::from_millis(100),
            default_dwell: 1,
            seed: 0,
            max_events: 100_000,
        }
    }
}

impl SimConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn monitored(mut self) -> Self {
        self.drive = Drive::Monitored;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenState {
    Active,
    /// Stopped by a service fault; may still be moved by injection.
    Parked,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub id: TokenId,
    pub identity: IdentityId,
    pub current_star: Option<StarId>,
    /// Node the token last entered; `None` before it crossed its entry arc.
    pub node: Option<NodeId>,
    pub home_process: ProcessId,
    pub binding: RelationId,
    pub entry_arc: ArcId,
    pub state: TokenState,
    /// Arc picked by the last service run, used by monitored drives.
    pub next_arc: Option<ArcId>,
    epoch: u64,
}

/// A movement reported from outside the kernel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ExternalAction {
    /// A new token for `identity` from the circle of `binding`.
    Create {
        binding: RelationId,
        identity: IdentityId,
    },
    Fire {
        token: TokenId,
        arc: ArcId,
    },
    /// Cross the arc from the token's current node to `node`.
    Enter {
        token: TokenId,
        node: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalEvent {
    /// Simulated time; `None` means now.
    #[serde(default)]
    pub at: Option<u64>,
    #[serde(flatten)]
    pub action: ExternalAction,
}

impl ExternalEvent {
    pub fn now(action: ExternalAction) -> Self {
        ExternalEvent { at: None, action }
    }

    pub fn at(time: u64, action: ExternalAction) -> Self {
        ExternalEvent {
            at: Some(time),
            action,
        }
    }
}

#[derive(Debug, Error)]
pub enum KernelError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    FlowConflict(#[from] FlowConflict),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown token {0}")]
    UnknownToken(TokenId),
    #[error("token {0} has finished")]
    TokenFinished(TokenId),
    #[error("token {token} is not at the source of arc {arc}")]
    NotAtArcSource { token: TokenId, arc: ArcId },
    #[error("no arc leads from the position of token {token} to node {node}")]
    NoSuchMove { token: TokenId, node: NodeId },
    #[error("relation {0} is not a flow binding")]
    NotABinding(RelationId),
    #[error("identity {identity} is not in the circle of binding {binding}")]
    NotInSource {
        binding: RelationId,
        identity: IdentityId,
    },
    #[error("event time {at} is before the current clock {clock}")]
    InPast { at: u64, clock: u64 },
    #[error("run stopped after {limit} events with work pending")]
    Truncated { limit: u64, partial: Trace },
}

pub type SubscriptionId = u64;

type Listener = Box<dyn FnMut(&TraceEvent) + Send>;

#[derive(Debug, Clone)]
enum Action {
    Create(TokenId),
    Fire {
        token: TokenId,
        arc: ArcId,
        epoch: u64,
    },
    /// Injected creation, with the source star seen at injection time.
    InjectedCreate {
        binding: RelationId,
        identity: IdentityId,
        star: StarId,
    },
    InjectedFire {
        token: TokenId,
        arc: ArcId,
    },
    InjectedEnter {
        token: TokenId,
        node: NodeId,
    },
}

#[derive(Debug, Clone)]
struct Scheduled {
    time: u64,
    seq: u64,
    action: Action,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

/// Where the source star of a new token sits.
#[derive(Debug, Clone)]
struct Origin {
    circle: CircleId,
    star: StarId,
}

pub struct SimState {
    config: SimConfig,
    clock: u64,
    queue: BinaryHeap<Reverse<Scheduled>>,
    enqueued: u64,
    model: Model,
    tokens: BTreeMap<TokenId, Token>,
    origins: BTreeMap<TokenId, Origin>,
    next_token: u64,
    trace: Trace,
    batch: Vec<TraceEvent>,
    listeners: Vec<(SubscriptionId, Listener)>,
    next_subscription: SubscriptionId,
    processed: u64,
    /// Injected creations not yet executed; their tokens may already be named.
    announced: u64,
    wall_start: Instant,
}

impl std::fmt::Debug for SimState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimState")
            .field("clock", &self.clock)
            .field("pending", &self.queue.len())
            .field("tokens", &self.tokens.len())
            .field("trace_len", &self.trace.len())
            .finish()
    }
}

/// Set up a simulation. In autonomous drives one token per member of every
/// bound circle is scheduled at time zero, bindings in id order and members
/// in queue order.
pub fn init_sim(model: Model, config: SimConfig) -> Result<SimState, KernelError> {
    if config.max_events == 0 {
        return Err(KernelError::Config("max_events must be positive".into()));
    }
    model.check_integrity()?;
    topology::resolve_flows(&model)?;
    let mut sim = SimState {
        config,
        clock: 0,
        queue: BinaryHeap::new(),
        enqueued: 0,
        model,
        tokens: BTreeMap::new(),
        origins: BTreeMap::new(),
        next_token: 1,
        trace: Trace::default(),
        batch: Vec::new(),
        listeners: Vec::new(),
        next_subscription: 1,
        processed: 0,
        announced: 0,
        wall_start: Instant::now(),
    };
    if sim.config.drive == Drive::Autonomous {
        let bindings: Vec<(RelationId, CircleId)> =
            sim.model.flow_bindings().map(|(r, c, _)| (r, c)).collect();
        for (binding, circle) in bindings {
            let members: Vec<StarId> = sim.model.circle(circle)?.stars.clone();
            for star in members {
                let identity = sim.model.star(star)?.identity;
                let token = sim.new_token(binding, identity, star)?;
                sim.enqueue(0, Action::Create(token));
            }
        }
    }
    Ok(sim)
}

impl SimState {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.tokens.values()
    }

    pub fn token(&self, id: TokenId) -> Option<&Token> {
        self.tokens.get(&id)
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Time of the next queued event.
    pub fn next_time(&self) -> Option<u64> {
        self.queue.peek().map(|Reverse(s)| s.time)
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn subscribe(
        &mut self,
        listener: impl FnMut(&TraceEvent) + Send + 'static,
    ) -> SubscriptionId {
        let id = self.next_subscription;
        self.next_subscription += 1;
        self.listeners.push((id, Box::new(listener)));
        id
    }

    pub fn unsubscribe(&mut self, id: SubscriptionId) -> bool {
        let before = self.listeners.len();
        self.listeners.retain(|(l, _)| *l != id);
        self.listeners.len() != before
    }

    fn enqueue(&mut self, time: u64, action: Action) {
        let seq = self.enqueued;
        self.enqueued += 1;
        self.queue.push(Reverse(Scheduled { time, seq, action }));
    }

    fn new_token(
        &mut self,
        binding: RelationId,
        identity: IdentityId,
        star: StarId,
    ) -> Result<TokenId, KernelError> {
        let (circle, arc) = match self.model.relation(binding)?.kind {
            RelationKind::FlowBinding { circle, arc } => (circle, arc),
            _ => return Err(KernelError::NotABinding(binding)),
        };
        let from = self.model.arc(arc)?.from;
        let home = topology::process_of(&self.model, from)
            .map(|p| p.id)
            .unwrap_or(ProcessId(from.0));
        let id = TokenId(self.next_token);
        self.next_token += 1;
        self.tokens.insert(
            id,
            Token {
                id,
                identity,
                current_star: Some(star),
                node: None,
                home_process: home,
                binding,
                entry_arc: arc,
                state: TokenState::Active,
                next_arc: None,
                epoch: 0,
            },
        );
        self.origins.insert(id, Origin { circle, star });
        Ok(id)
    }

    /// Queue an externally observed movement.
    pub fn inject(&mut self, event: ExternalEvent) -> Result<(), KernelError> {
        let at = match (event.at, self.config.mode) {
            (Some(at), _) => at,
            (None, ClockMode::Simulated) => self.clock,
            (None, ClockMode::Realtime) => self.wall_ticks().max(self.clock),
        };
        if at < self.clock {
            return Err(KernelError::InPast {
                at,
                clock: self.clock,
            });
        }
        let action = match event.action {
            ExternalAction::Create { binding, identity } => {
                let circle = match self.model.relation(binding)?.kind {
                    RelationKind::FlowBinding { circle, .. } => circle,
                    _ => return Err(KernelError::NotABinding(binding)),
                };
                self.model.identity_node(identity)?;
                let star = self
                    .model
                    .star_in(identity, circle)
                    .ok_or(KernelError::NotInSource { binding, identity })?;
                self.announced += 1;
                Action::InjectedCreate {
                    binding,
                    identity,
                    star,
                }
            }
            ExternalAction::Fire { token, arc } => {
                self.known_token(token)?;
                self.model.arc(arc)?;
                Action::InjectedFire { token, arc }
            }
            ExternalAction::Enter { token, node } => {
                self.known_token(token)?;
                self.model.node(node)?;
                Action::InjectedEnter { token, node }
            }
        };
        self.enqueue(at, action);
        Ok(())
    }

    /// A live token, or one a queued injected creation will produce.
    fn known_token(&self, id: TokenId) -> Result<(), KernelError> {
        if self.tokens.contains_key(&id) {
            return self.live_token(id).map(|_| ());
        }
        if id.0 >= self.next_token && id.0 < self.next_token + self.announced {
            return Ok(());
        }
        Err(KernelError::UnknownToken(id))
    }

    fn live_token(&self, id: TokenId) -> Result<&Token, KernelError> {
        let token = self.tokens.get(&id).ok_or(KernelError::UnknownToken(id))?;
        if token.state == TokenState::Finished {
            return Err(KernelError::TokenFinished(id));
        }
        Ok(token)
    }

    fn wall_ticks(&self) -> u64 {
        let unit = self.config.time_unit.as_nanos().max(1);
        (self.wall_start.elapsed().as_nanos() / unit) as u64
    }

    fn wait_for_wall_clock(&self, time: u64) {
        if self.config.mode != ClockMode::Realtime {
            return;
        }
        let due = self
            .config
            .time_unit
            .saturating_mul(time.min(u32::MAX as u64) as u32);
        let elapsed = self.wall_start.elapsed();
        if due > elapsed {
            std::thread::sleep(due - elapsed);
        }
    }

    /// Dequeue and execute one event. Returns the events it produced, or
    /// `None` when nothing is pending.
    pub fn step(&mut self) -> Result<Option<Vec<TraceEvent>>, KernelError> {
        loop {
            let Some(Reverse(next)) = self.queue.pop() else {
                return Ok(None);
            };
            if let Action::Fire { token, epoch, .. } = next.action {
                let stale = self
                    .tokens
                    .get(&token)
                    .is_none_or(|t| t.epoch != epoch || t.state != TokenState::Active);
                if stale {
                    continue;
                }
            }
            self.wait_for_wall_clock(next.time);
            self.clock = next.time;
            self.processed += 1;
            let result = self.execute(next.action);
            let batch = self.commit();
            result?;
            if cfg!(debug_assertions) {
                if let Err(e) = self.model.check_integrity() {
                    panic!("kernel broke model integrity: {e}");
                }
            }
            return Ok(Some(batch));
        }
    }

    /// Run until the queue drains, `until` is passed, or `max_events` is hit.
    pub fn run(&mut self, until: Option<u64>) -> Result<&Trace, KernelError> {
        while let Some(time) = self.next_time() {
            if until.is_some_and(|u| time > u) {
                self.clock = self.clock.max(until.unwrap());
                break;
            }
            if self.processed >= self.config.max_events {
                return Err(KernelError::Truncated {
                    limit: self.config.max_events,
                    partial: self.trace.clone(),
                });
            }
            self.step()?;
        }
        Ok(&self.trace)
    }

    fn commit(&mut self) -> Vec<TraceEvent> {
        let batch = std::mem::take(&mut self.batch);
        for event in &batch {
            self.trace.push(event.clone());
            for (_, listener) in self.listeners.iter_mut() {
                listener(event);
            }
        }
        batch
    }

    pub(crate) fn emit(&mut self, mut event: TraceEvent) {
        event.time = self.clock;
        event.seq = (self.trace.len() + self.batch.len()) as u64;
        self.batch.push(event);
    }

    pub(crate) fn model_mut(&mut self) -> &mut Model {
        &mut self.model
    }

    fn execute(&mut self, action: Action) -> Result<(), KernelError> {
        match action {
            Action::Create(token) => self.create(token),
            Action::Fire { token, arc, .. } => self.cross(token, arc),
            Action::InjectedCreate {
                binding,
                identity,
                star,
            } => {
                self.announced = self.announced.saturating_sub(1);
                let token = self.new_token(binding, identity, star)?;
                self.create(token)
            }
            Action::InjectedFire { token, arc } => self.cross(token, arc),
            Action::InjectedEnter { token, node } => {
                let t = self.live_token(token)?;
                let arc = match t.node {
                    Some(at) => self
                        .model
                        .arcs_from(at)
                        .find(|a| a.to == node)
                        .map(|a| a.id),
                    None => self
                        .model
                        .arc(t.entry_arc)
                        .ok()
                        .filter(|a| a.to == node)
                        .map(|a| a.id),
                };
                let arc = arc.ok_or(KernelError::NoSuchMove { token, node })?;
                self.cross(token, arc)
            }
        }
    }

    fn create(&mut self, token: TokenId) -> Result<(), KernelError> {
        let t = self.tokens[&token].clone();
        let origin = self.origins[&token].clone();
        let owner = self.model.circle(origin.circle).ok().map(|c| c.owner);
        let mut ev = TraceEvent::new(EventKind::TokenCreated);
        ev.token = Some(token);
        ev.identity = Some(t.identity);
        ev.node = owner;
        ev.circle = Some(origin.circle);
        ev.star = Some(origin.star);
        ev.arc = Some(t.entry_arc);
        ev.relation = Some(t.binding);
        self.emit(ev);
        if self.model.star(origin.star).is_err() {
            self.park(token, None, None, "source placement vanished before entry");
            if let Some(tok) = self.tokens.get_mut(&token) {
                tok.current_star = None;
            }
            return Ok(());
        }
        self.cross(token, t.entry_arc)
    }

    /// Stop `token`. `arc` is the crossing that was refused, if any.
    fn park(&mut self, token: TokenId, node: Option<NodeId>, arc: Option<ArcId>, reason: &str) {
        let identity = self.tokens[&token].identity;
        let mut ev = TraceEvent::new(EventKind::ServiceFault);
        ev.token = Some(token);
        ev.identity = Some(identity);
        ev.node = node;
        ev.arc = arc;
        ev.tag = Some(reason.to_owned());
        self.emit(ev);
        let tok = self.tokens.get_mut(&token).unwrap();
        tok.state = TokenState::Parked;
        tok.epoch += 1;
    }

    /// Target circle for arrivals at `node`, created on first use.
    fn place_circle(&mut self, node: NodeId) -> Result<CircleId, KernelError> {
        if let Some(c) = self.model.circle_named(node, "place") {
            return Ok(c);
        }
        Ok(self.model_mut().add_circle(node, "place")?)
    }

    /// Move `token` across `arc` now, run the service at the arrival node
    /// and return the events produced.
    pub fn fire(&mut self, token: TokenId, arc: ArcId) -> Result<Vec<TraceEvent>, KernelError> {
        let result = self.cross(token, arc);
        let batch = self.commit();
        result.map(|_| batch)
    }

    fn cross(&mut self, token: TokenId, arc: ArcId) -> Result<(), KernelError> {
        let t = self.live_token(token)?.clone();
        let a = self.model.arc(arc)?.clone();
        let star = t
            .current_star
            .and_then(|s| self.model.star(s).ok().copied())
            .ok_or(KernelError::NotAtArcSource { token, arc })?;
        let source_owner = self.model.circle(star.circle)?.owner;
        let at_entry = t.node.is_none()
            && arc == t.entry_arc
            && self.origins.get(&token).is_some_and(|o| o.star == star.id);
        if source_owner != a.from && !at_entry {
            return Err(KernelError::NotAtArcSource { token, arc });
        }

        let kinds: Vec<DotKind> = a
            .dots
            .iter()
            .filter_map(|d| self.model.node(*d).ok().and_then(|n| n.dot_kind))
            .collect();
        let rounded = kinds.contains(&DotKind::Duplicate);
        let gate = kinds.contains(&DotKind::Gate);

        let target_circle = if gate {
            None
        } else {
            let c = self.place_circle(a.to)?;
            if self.model.star_in(t.identity, c).is_some() {
                self.park(
                    token,
                    Some(a.to),
                    Some(arc),
                    "identity already placed at target",
                );
                return Ok(());
            }
            Some(c)
        };

        let mut left = TraceEvent::new(EventKind::TokenLeft);
        left.token = Some(token);
        left.identity = Some(t.identity);
        left.node = Some(source_owner);
        left.circle = Some(star.circle);
        left.star = Some(star.id);
        left.arc = Some(arc);
        self.emit(left);

        if !rounded {
            self.model_mut().remove_star(star.id)?;
            let mut ev = TraceEvent::new(EventKind::StarDestroyed);
            ev.token = Some(token);
            ev.identity = Some(t.identity);
            ev.circle = Some(star.circle);
            ev.star = Some(star.id);
            ev.cause = Some(if gate {
                StarCause::Gate
            } else {
                StarCause::Move
            });
            self.emit(ev);
        }

        let Some(circle) = target_circle else {
            let mut ev = TraceEvent::new(EventKind::TokenFinished);
            ev.token = Some(token);
            ev.identity = Some(t.identity);
            ev.arc = Some(arc);
            self.emit(ev);
            let tok = self.tokens.get_mut(&token).unwrap();
            tok.state = TokenState::Finished;
            tok.current_star = None;
            tok.epoch += 1;
            return Ok(());
        };

        let new_star = self.model_mut().place_star(t.identity, circle)?;
        let mut ev = TraceEvent::new(EventKind::StarCreated);
        ev.token = Some(token);
        ev.identity = Some(t.identity);
        ev.circle = Some(circle);
        ev.star = Some(new_star);
        ev.cause = Some(if rounded {
            StarCause::Duplicate
        } else {
            StarCause::Move
        });
        self.emit(ev);

        let mut ev = TraceEvent::new(EventKind::TokenEntered);
        ev.token = Some(token);
        ev.identity = Some(t.identity);
        ev.node = Some(a.to);
        ev.circle = Some(circle);
        ev.star = Some(new_star);
        ev.arc = Some(arc);
        self.emit(ev);

        {
            let tok = self.tokens.get_mut(&token).unwrap();
            tok.current_star = Some(new_star);
            tok.node = Some(a.to);
            tok.state = TokenState::Active;
            tok.next_arc = None;
            tok.epoch += 1;
        }
        self.serve(token, a.to)
    }

    fn serve(&mut self, token: TokenId, node: NodeId) -> Result<(), KernelError> {
        match pilots::execute(self, node, token)? {
            Outcome::Next { arc, dwell } => {
                let tok = self.tokens.get_mut(&token).unwrap();
                tok.next_arc = Some(arc);
                if self.config.drive == Drive::Autonomous {
                    let epoch = tok.epoch;
                    let at = self.clock + self.config.default_dwell + dwell;
                    self.enqueue(at, Action::Fire { token, arc, epoch });
                }
            }
            Outcome::Finished => {
                let tok = self.tokens.get_mut(&token).unwrap();
                tok.state = TokenState::Finished;
                tok.epoch += 1;
            }
            Outcome::Parked(reason) => self.park(token, Some(node), None, &reason),
        }
        Ok(())
    }

    pub(crate) fn token_mut(&mut self, id: TokenId) -> Option<&mut Token> {
        self.tokens.get_mut(&id)
    }
}

/// Injection script reproducing the movements recorded in `trace`.
///
/// Token creations become [`ExternalAction::Create`] and every crossing,
/// made or refused, that is not part of a creation becomes
/// [`ExternalAction::Fire`], each stamped
/// with its original time. Feeding the script to a monitored simulation of
/// the same model reproduces the trace.
pub fn replay_script(trace: &Trace) -> Vec<ExternalEvent> {
    let events = trace.events();
    let mut out = Vec::new();
    for (i, e) in events.iter().enumerate() {
        match e.kind {
            EventKind::TokenCreated => {
                if let (Some(binding), Some(identity)) = (e.relation, e.identity) {
                    out.push(ExternalEvent::at(
                        e.time,
                        ExternalAction::Create { binding, identity },
                    ));
                }
            }
            // A refused crossing is replayed too, so the replay parks alike.
            EventKind::TokenLeft | EventKind::ServiceFault => {
                let entry = i > 0
                    && events[i - 1].kind == EventKind::TokenCreated
                    && events[i - 1].token == e.token;
                if !entry {
                    if let (Some(token), Some(arc)) = (e.token, e.arc) {
                        out.push(ExternalEvent::at(
                            e.time,
                            ExternalAction::Fire { token, arc },
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    out
}
