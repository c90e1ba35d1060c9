//! Typed element identifiers.
//!
//! Every element of a [`Model`](super::Model) draws its id from one shared
//! counter, so an id is unique across element kinds and never reused. The
//! newtypes only exist so that a `CircleId` cannot be passed where a `StarId`
//! is expected.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! element_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl $name {
            pub fn raw(self) -> u64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

element_id!(NodeId);
element_id!(CircleId);
element_id!(StarId);
element_id!(ArcId);
element_id!(RelationId);
element_id!(ServiceId);
element_id!(
    /// The identity carried by a node. Numerically equal to the owning
    /// node's id: one identity per node, created with it.
    IdentityId
);

impl From<NodeId> for IdentityId {
    fn from(node: NodeId) -> Self {
        IdentityId(node.0)
    }
}

impl From<IdentityId> for NodeId {
    fn from(identity: IdentityId) -> Self {
        NodeId(identity.0)
    }
}
