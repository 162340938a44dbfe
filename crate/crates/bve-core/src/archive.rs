//! Grid archive: one elite candidate per behavioral cell, replaced only by a
//! strictly higher program derivative, with curiosity bookkeeping for
//! score-proportionate parent selection.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::derivative::BoundaryCandidate;
use crate::descriptors::{cell_coord, CellCoord};
use crate::error::{Error, Result};
use crate::sut::SutSpec;

/// Which search phase produced an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Sampler,
    Explorer,
    Tracer,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::Sampler => "sampler",
            Phase::Explorer => "explorer",
            Phase::Tracer => "tracer",
        };
        f.write_str(s)
    }
}

/// Result of offering a candidate to the archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    /// The cell was empty; the candidate now occupies it.
    NewCell,
    /// The candidate displaced a weaker incumbent.
    Improved,
    /// The candidate was discarded (non-boundary, or not better).
    Rejected,
}

impl AddOutcome {
    pub fn is_added(&self) -> bool {
        !matches!(self, AddOutcome::Rejected)
    }
}

/// An elite candidate occupying one cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub candidate: BoundaryCandidate,
    pub cell: CellCoord,
    pub curiosity: f64,
    pub phase: Phase,
    /// Identity of this occupancy; a replacement in the same cell gets a new
    /// token, which is how displaced parents stop receiving curiosity updates.
    pub token: u64,
}

/// Parent selection weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionWeight {
    Uniform,
    Fitness,
    Curiosity,
}

impl std::fmt::Display for SelectionWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SelectionWeight::Uniform => "uniform",
            SelectionWeight::Fitness => "fitness",
            SelectionWeight::Curiosity => "curiosity",
        };
        f.write_str(s)
    }
}

/// Offset keeping shifted curiosity weights positive and every entry selectable.
const CURIOSITY_EPSILON: f64 = 0.1;

#[derive(Debug, Default)]
pub struct Archive {
    cells: BTreeMap<CellCoord, ArchiveEntry>,
    pub offer_count: u64,
    pub new_cell_count: u64,
    pub improve_count: u64,
    pub reject_count: u64,
    next_token: u64,
}

impl Archive {
    pub fn new() -> Self {
        Archive::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, cell: &CellCoord) -> Option<&ArchiveEntry> {
        self.cells.get(cell)
    }

    /// Entries in cell-lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = &ArchiveEntry> {
        self.cells.values()
    }

    /// Offers a candidate. Non-boundary candidates (pd == 0) and candidates
    /// that do not strictly beat the incumbent are rejected; ties keep the
    /// incumbent so replays stay deterministic.
    pub fn offer(
        &mut self,
        candidate: BoundaryCandidate,
        sut: &SutSpec,
        phase: Phase,
    ) -> Result<AddOutcome> {
        let cell = cell_coord(&candidate, sut)?;
        Ok(self.offer_at(cell, candidate, phase))
    }

    /// Offer with a precomputed cell coordinate.
    pub fn offer_at(
        &mut self,
        cell: CellCoord,
        candidate: BoundaryCandidate,
        phase: Phase,
    ) -> AddOutcome {
        self.offer_count += 1;
        if !candidate.is_boundary() {
            self.reject_count += 1;
            return AddOutcome::Rejected;
        }
        match self.cells.get(&cell) {
            None => {
                let token = self.fresh_token();
                self.cells.insert(
                    cell,
                    ArchiveEntry {
                        candidate,
                        cell,
                        curiosity: 0.0,
                        phase,
                        token,
                    },
                );
                self.new_cell_count += 1;
                AddOutcome::NewCell
            }
            Some(incumbent) if candidate.pd > incumbent.candidate.pd => {
                let token = self.fresh_token();
                self.cells.insert(
                    cell,
                    ArchiveEntry {
                        candidate,
                        cell,
                        curiosity: 0.0,
                        phase,
                        token,
                    },
                );
                self.improve_count += 1;
                AddOutcome::Improved
            }
            Some(_) => {
                self.reject_count += 1;
                AddOutcome::Rejected
            }
        }
    }

    fn fresh_token(&mut self) -> u64 {
        self.next_token += 1;
        self.next_token
    }

    /// Selects a parent entry. Uniform treats entries equiprobably; Fitness
    /// weighs by pd; Curiosity weighs by the shifted curiosity score
    /// `curiosity - min(0, min_curiosity) + 0.1`.
    pub fn select_weighted<R: Rng + ?Sized>(
        &self,
        weight: SelectionWeight,
        rng: &mut R,
    ) -> Result<&ArchiveEntry> {
        if self.cells.is_empty() {
            return Err(Error::EmptyArchive);
        }
        match weight {
            SelectionWeight::Uniform => {
                let idx = rng.gen_range(0..self.cells.len());
                Ok(self.cells.values().nth(idx).expect("index in range"))
            }
            SelectionWeight::Fitness => self.select_proportional(rng, |e| e.candidate.pd),
            SelectionWeight::Curiosity => {
                let min_curiosity = self
                    .cells
                    .values()
                    .map(|e| e.curiosity)
                    .fold(f64::INFINITY, f64::min);
                let shift = -min_curiosity.min(0.0) + CURIOSITY_EPSILON;
                self.select_proportional(rng, move |e| e.curiosity + shift)
            }
        }
    }

    fn select_proportional<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        weight: impl Fn(&ArchiveEntry) -> f64,
    ) -> Result<&ArchiveEntry> {
        let total: f64 = self.cells.values().map(&weight).sum();
        if total <= 0.0 {
            // All weights zero; degrade to uniform.
            let idx = rng.gen_range(0..self.cells.len());
            return Ok(self.cells.values().nth(idx).expect("index in range"));
        }
        let mut target = rng.gen_range(0.0..total);
        for entry in self.cells.values() {
            let w = weight(entry);
            if target < w {
                return Ok(entry);
            }
            target -= w;
        }
        // Float accumulation can land past the last weight.
        Ok(self.cells.values().next_back().expect("non-empty"))
    }

    /// Applies the curiosity update to the parent occupying `parent_cell`,
    /// a no-op when the parent has been displaced.
    pub fn update_curiosity(
        &mut self,
        parent_cell: &CellCoord,
        parent_token: u64,
        outcome: AddOutcome,
    ) {
        if let Some(entry) = self.cells.get_mut(parent_cell) {
            if entry.token == parent_token {
                entry.curiosity += match outcome {
                    AddOutcome::NewCell | AddOutcome::Improved => 1.0,
                    AddOutcome::Rejected => -0.5,
                };
            }
        }
    }

    /// All entries in cell-lexicographic order, for persistence.
    pub fn snapshot(&self) -> Vec<ArchiveEntry> {
        self.cells.values().cloned().collect()
    }
}
