use serde::{Deserialize, Serialize};

use crate::model::{ArcId, CircleId, IdentityId, NodeId, RelationId, ServiceId};

/// The instruction list a pilot runs when a token enters a node it controls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Service {
    pub id: ServiceId,
    pub pilot: IdentityId,
    pub target: NodeId,
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Instruction {
    /// Extend the dwell time at the current node.
    Wait {
        ticks: u64,
    },
    /// Link the token to the members of the association's far circle whose
    /// names match `selector`. The matched identities become the selection.
    Link {
        association: RelationId,
        selector: String,
    },
    /// Place every identity of the current selection into the circle.
    DuplicateTo {
        circle: CircleId,
    },
    /// Place the token's own identity into the circle.
    PlaceIn {
        circle: CircleId,
    },
    Emit {
        tag: String,
    },
    Route {
        arc: ArcId,
    },
    Forward,
    Destroy,
}

impl Instruction {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            Instruction::Route { .. } | Instruction::Forward | Instruction::Destroy
        )
    }

    /// Upper-case mnemonic used in the XML vocabulary.
    pub fn op_name(&self) -> &'static str {
        match self {
            Instruction::Wait { .. } => "WAIT",
            Instruction::Link { .. } => "LINK",
            Instruction::DuplicateTo { .. } => "DUPLICATE_TO",
            Instruction::PlaceIn { .. } => "PLACE_IN",
            Instruction::Emit { .. } => "EMIT",
            Instruction::Route { .. } => "ROUTE",
            Instruction::Forward => "FORWARD",
            Instruction::Destroy => "DESTROY",
        }
    }

    /// Element ids this instruction refers to.
    pub fn references(&self) -> Option<u64> {
        match self {
            Instruction::Link { association, .. } => Some(association.0),
            Instruction::DuplicateTo { circle } | Instruction::PlaceIn { circle } => Some(circle.0),
            Instruction::Route { arc } => Some(arc.0),
            _ => None,
        }
    }
}
