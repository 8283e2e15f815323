//! Validation findings shared by the network and order-book checks.

use std::fmt;

use crate::grid::Network;
use crate::orderbook::OrderBook;

/// Network and order-book checks in one pass.
pub fn validate_all(net: &Network, ob: &OrderBook) -> ValidationReport {
    let mut report = crate::grid::validate_network(net);
    report.merge(crate::orderbook::validate_orderbook(ob, net));
    report
}

/// What a validation finding is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateBusId,
    DuplicateParticipantId,
    MissingReferenceBus,
    Disconnected,
    NonpositiveSusceptance,
    SelfLoop,
    ParallelLines,
    LimitsDontBracketZero,
    DanglingBusReference,
    NegativeAlpha,
    NonMonotoneOffer,
    NonMonotoneBid,
    BadBlockBounds,
    NegativeEmissionFactor,
    NonFiniteNumber,
}

impl ViolationKind {
    pub fn code(&self) -> &'static str {
        match self {
            ViolationKind::DuplicateBusId => "duplicate bus id",
            ViolationKind::DuplicateParticipantId => "duplicate participant id",
            ViolationKind::MissingReferenceBus => "missing reference",
            ViolationKind::Disconnected => "disconnected",
            ViolationKind::NonpositiveSusceptance => "nonpositive susceptance",
            ViolationKind::SelfLoop => "self loop",
            ViolationKind::ParallelLines => "parallel lines",
            ViolationKind::LimitsDontBracketZero => "limits do not bracket zero",
            ViolationKind::DanglingBusReference => "dangling bus reference",
            ViolationKind::NegativeAlpha => "negative alpha",
            ViolationKind::NonMonotoneOffer => "non-monotone offer",
            ViolationKind::NonMonotoneBid => "non-monotone bid",
            ViolationKind::BadBlockBounds => "bad block bounds",
            ViolationKind::NegativeEmissionFactor => "negative emission factor",
            ViolationKind::NonFiniteNumber => "non-finite number",
        }
    }
}

/// One invariant violation, with the entity it concerns.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.code(), self.detail)
    }
}

/// Collected findings of a validation pass; empty means valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            detail: detail.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            writeln!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}
