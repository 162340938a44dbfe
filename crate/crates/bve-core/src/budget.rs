//! Budget accounting shared by the search phases.
//!
//! A phase spends SUT evaluations through a gate, which enforces either an
//! evaluation allowance (hardware-independent) or a wall-clock deadline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

/// How a run's budget is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Budget {
    WallClockSeconds(f64),
    EvaluationCount(u64),
}

impl Budget {
    pub fn is_evaluation_mode(&self) -> bool {
        matches!(self, Budget::EvaluationCount(_))
    }
}

#[derive(Debug, Clone, Copy)]
enum Limit {
    Evaluations(u64),
    Deadline(Instant),
}

/// Spending gate for one phase (or one tracer seed).
#[derive(Debug)]
pub struct EvalGate {
    limit: Limit,
    used: u64,
}

impl EvalGate {
    pub fn evaluations(allowance: u64) -> Self {
        EvalGate {
            limit: Limit::Evaluations(allowance),
            used: 0,
        }
    }

    pub fn deadline(deadline: Instant) -> Self {
        EvalGate {
            limit: Limit::Deadline(deadline),
            used: 0,
        }
    }

    /// Reserves `n` evaluations; returns false (spending nothing) once the
    /// allowance or deadline is exhausted.
    pub fn try_spend(&mut self, n: u64) -> bool {
        let ok = match self.limit {
            Limit::Evaluations(allowance) => self.used + n <= allowance,
            Limit::Deadline(deadline) => Instant::now() < deadline,
        };
        if ok {
            self.used += n;
        }
        ok
    }

    /// Spends `n` evaluations unconditionally (fixed costs such as population
    /// initialization, budgeted by the caller).
    pub fn force_spend(&mut self, n: u64) {
        self.used += n;
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    /// Remaining allowance in evaluation mode; None under a deadline.
    pub fn remaining(&self) -> Option<u64> {
        match self.limit {
            Limit::Evaluations(allowance) => Some(allowance.saturating_sub(self.used)),
            Limit::Deadline(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn evaluation_gate_is_exact() {
        let mut gate = EvalGate::evaluations(5);
        assert!(gate.try_spend(2));
        assert!(gate.try_spend(2));
        assert!(!gate.try_spend(2)); // only 1 left
        assert!(gate.try_spend(1));
        assert_eq!(gate.used(), 5);
        assert_eq!(gate.remaining(), Some(0));
    }

    #[test]
    fn deadline_gate_stops() {
        let mut gate = EvalGate::deadline(Instant::now() + Duration::from_millis(20));
        assert!(gate.try_spend(2));
        std::thread::sleep(Duration::from_millis(30));
        assert!(!gate.try_spend(2));
    }
}
