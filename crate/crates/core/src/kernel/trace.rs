use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ArcId, CircleId, IdentityId, Model, NodeId, RelationId, ServiceId, StarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u64);

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TokenCreated,
    TokenEntered,
    TokenLeft,
    StarCreated,
    StarDestroyed,
    LinkCreated,
    ServiceExecuted,
    TokenFinished,
    ServiceFault,
    BranchWarning,
    Emitted,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TokenCreated => "token_created",
            EventKind::TokenEntered => "token_entered",
            EventKind::TokenLeft => "token_left",
            EventKind::StarCreated => "star_created",
            EventKind::StarDestroyed => "star_destroyed",
            EventKind::LinkCreated => "link_created",
            EventKind::ServiceExecuted => "service_executed",
            EventKind::TokenFinished => "token_finished",
            EventKind::ServiceFault => "service_fault",
            EventKind::BranchWarning => "branch_warning",
            EventKind::Emitted => "emitted",
        }
    }
}

/// Why a star appeared or vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarCause {
    /// Plain transition: source star removed, target star created.
    Move,
    /// Rounded dot on the arc: target star created, source kept.
    Duplicate,
    /// Gate on the arc.
    Gate,
    /// `DESTROY` instruction.
    Destroy,
    /// `DUPLICATE_TO` instruction.
    DuplicateTo,
    /// `PLACE_IN` instruction.
    Place,
}

/// One entry of the simulation log. Serialized field order is fixed; absent
/// subjects are omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: u64,
    pub seq: u64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<TokenId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<IdentityId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<CircleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peer: Option<StarId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc: Option<ArcId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<ServiceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot: Option<IdentityId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<StarCause>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl TraceEvent {
    pub(crate) fn new(kind: EventKind) -> Self {
        TraceEvent {
            time: 0,
            seq: 0,
            kind,
            token: None,
            identity: None,
            node: None,
            circle: None,
            star: None,
            peer: None,
            arc: None,
            relation: None,
            service: None,
            pilot: None,
            cause: None,
            tag: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace events always serialize")
    }
}

/// Append-only, replayable event log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub(crate) fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    /// One JSON object per line, LF terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_json());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, serde_json::Error> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trace { events })
    }

    /// The same log with every time stamp zeroed.
    pub fn without_time(&self) -> Trace {
        Trace {
            events: self
                .events
                .iter()
                .cloned()
                .map(|mut e| {
                    e.time = 0;
                    e
                })
                .collect(),
        }
    }
}

impl TraceEvent {
    /// One line with names looked up in `model`; ids the model no longer
    /// knows print as `#id`.
    pub fn render(&self, model: &Model) -> String {
        let node = |id: NodeId| {
            model
                .node(id)
                .map(|n| n.name.clone())
                .unwrap_or_else(|_| format!("#{id}"))
        };
        let circle = |id: CircleId| match model.circle(id) {
            Ok(c) => format!("{}/{}", node(c.owner), c.name),
            Err(_) => format!("#{id}"),
        };
        let mut line = format!("{:>4} {:<16}", self.time, self.kind.as_str());
        if let Some(t) = self.token {
            line.push_str(&format!(" token={t}"));
        }
        if let Some(i) = self.identity {
            line.push_str(&format!(" identity={}", node(i.into())));
        }
        if let Some(n) = self.node {
            line.push_str(&format!(" node={}", node(n)));
        }
        if let Some(c) = self.circle {
            line.push_str(&format!(" circle={}", circle(c)));
        }
        if let Some(s) = self.star {
            line.push_str(&format!(" star={s}"));
        }
        if let Some(s) = self.peer {
            let name = model
                .star(s)
                .map(|st| node(st.identity.into()))
                .unwrap_or_else(|_| format!("#{s}"));
            line.push_str(&format!(" peer={name}"));
        }
        if let Some(a) = self.arc {
            let text = match model.arc(a) {
                Ok(arc) => format!("{}->{}", node(arc.from), node(arc.to)),
                Err(_) => format!("#{a}"),
            };
            line.push_str(&format!(" arc={text}"));
        }
        if let Some(r) = self.relation {
            line.push_str(&format!(" relation={r}"));
        }
        if let Some(s) = self.service {
            line.push_str(&format!(" service={s}"));
        }
        if let Some(p) = self.pilot {
            line.push_str(&format!(" pilot={}", node(p.into())));
        }
        if let Some(c) = self.cause {
            let c = serde_json::to_value(c).expect("cause");
            line.push_str(&format!(" cause={}", c.as_str().unwrap_or_default()));
        }
        if let Some(t) = &self.tag {
            line.push_str(&format!(" tag={t:?}"));
        }
        line
    }
}

impl Trace {
    /// The log as readable lines, one per event.
    pub fn render(&self, model: &Model) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.render(model));
            out.push('\n');
        }
        out
    }
}

impl From<Vec<TraceEvent>> for Trace {
    fn from(events: Vec<TraceEvent>) -> Self {
        Trace { events }
    }
}
