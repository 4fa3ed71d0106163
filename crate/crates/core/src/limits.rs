//! Size budgets for the operations whose cost grows with `|G|^n`.
//!
//! A budget violation is a resource refusal, not a mathematical verdict;
//! callers surface it as a distinct error carrying the offending sizes so
//! the caller can raise the limit and retry.

use thiserror::Error;

/// Default cap on the dimension of a cochain space handled at once.
pub const DEFAULT_SPACE_CELLS: u64 = 1 << 22;

/// Default cap on the number of candidates visited by an enumeration.
pub const DEFAULT_ENUM_STEPS: u64 = 1 << 20;

/// Matrices may be larger than the spaces they act on by one factor of
/// `|G|`; the materialization cap scales accordingly.
pub const MATRIX_CELL_FACTOR: u64 = 16;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("budget exceeded for {what}: required {required} > limit {limit}")]
pub struct BudgetExceeded {
    pub what: &'static str,
    pub required: u64,
    pub limit: u64,
}

/// Resource limits threaded through cohomology and Massey searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of coordinates in a cochain space (`|G|^n * dim`).
    pub space_cells: u64,
    /// Maximum number of entries in a materialized coboundary matrix.
    pub matrix_cells: u64,
    /// Maximum number of candidates an exhaustive search may visit.
    pub enum_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget::with_space_cells(DEFAULT_SPACE_CELLS)
    }
}

impl Budget {
    /// Budget whose matrix and enumeration limits are scaled from a single
    /// space-size knob, mirroring the CLI's `--budget` flag.
    pub fn with_space_cells(space_cells: u64) -> Self {
        Budget {
            space_cells,
            matrix_cells: space_cells.saturating_mul(MATRIX_CELL_FACTOR),
            enum_steps: DEFAULT_ENUM_STEPS.min(space_cells.saturating_mul(4)),
        }
    }

    pub fn check_space(&self, what: &'static str, required: u64) -> Result<(), BudgetExceeded> {
        if required > self.space_cells {
            return Err(BudgetExceeded { what, required, limit: self.space_cells });
        }
        Ok(())
    }

    pub fn check_matrix(&self, what: &'static str, required: u64) -> Result<(), BudgetExceeded> {
        if required > self.matrix_cells {
            return Err(BudgetExceeded { what, required, limit: self.matrix_cells });
        }
        Ok(())
    }
}

/// Shared countdown for enumerative searches; `tick` fails once the
/// configured number of steps has been spent.
#[derive(Debug)]
pub struct StepCounter {
    what: &'static str,
    limit: u64,
    spent: u64,
}

impl StepCounter {
    pub fn new(what: &'static str, limit: u64) -> Self {
        StepCounter { what, limit, spent: 0 }
    }

    pub fn tick(&mut self) -> Result<(), BudgetExceeded> {
        self.spent += 1;
        if self.spent > self.limit {
            return Err(BudgetExceeded { what: self.what, required: self.spent, limit: self.limit });
        }
        Ok(())
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }
}
