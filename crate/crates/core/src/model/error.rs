use thiserror::Error;

use super::ids::{ArcId, CircleId, IdentityId, NodeId, RelationId, ServiceId, StarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("element name must not be empty")]
    EmptyName,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown identity {0}")]
    UnknownIdentity(IdentityId),
    #[error("unknown circle {0}")]
    UnknownCircle(CircleId),
    #[error("unknown star {0}")]
    UnknownStar(StarId),
    #[error("unknown arc {0}")]
    UnknownArc(ArcId),
    #[error("unknown relation {0}")]
    UnknownRelation(RelationId),
    #[error("unknown service {0}")]
    UnknownService(ServiceId),
    #[error("unknown element {0}")]
    UnknownElement(u64),
    #[error("node {node} already has a circle named {name:?}")]
    DuplicateCircleName { node: NodeId, name: String },
    #[error("identity {identity} is already placed in circle {circle}")]
    DuplicatePlacement {
        identity: IdentityId,
        circle: CircleId,
    },
    #[error("arc from node {0} to itself")]
    SelfLoop(NodeId),
    #[error("node {0} is a dot and cannot terminate an arc")]
    DotEndpoint(NodeId),
    #[error("node {0} is not a dot")]
    NotADot(NodeId),
    #[error("dot {dot} is already placed on arc {arc}")]
    DotAlreadyPlaced { dot: NodeId, arc: ArcId },
    #[error("dot position {position} out of range on arc {arc}")]
    DotPosition { arc: ArcId, position: usize },
    #[error("nothing may follow the gate on arc {0}")]
    AfterGate(ArcId),
    #[error("arc {0} already carries a gate")]
    SecondGate(ArcId),
    #[error("{0}")]
    EndpointMismatch(String),
    #[error("node {0} already has a root pilot")]
    SecondRootPilot(NodeId),
    #[error("relation {0} is not an association")]
    NotAnAssociation(RelationId),
    #[error("stars {a} and {b} do not sit in the circles of association {association}")]
    CircleMismatch {
        association: RelationId,
        a: StarId,
        b: StarId,
    },
    #[error("duplicate relation: {0}")]
    DuplicateRelation(String),
    #[error("integrity violation: {0}")]
    Integrity(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
