//! Massey products of degree-1 classes with trivial `F_p`
//! coefficients: defining systems, their values, the triple product as
//! an explicit coset in `H^2`, and n-fold vanishing verdicts.
//!
//! A defining system for classes `x_1, …, x_n` assigns a 1-cochain
//! `a_ij` to every pair `1 ≤ i < j ≤ n+1` except `(1, n+1)`, such that
//! `a_{i,i+1}` represents `x_i` and `da_ij = Σ_l a_il ∪ a_lj` for the
//! longer intervals. Its value is the 2-cocycle
//! `Σ_{k=2}^{n} a_{1k} ∪ a_{k,n+1}`.
//!
//! The triple product is computed by linear algebra alone: solve the
//! two coboundary equations, then sweep the solution freedom through
//! the bilinear value map, which contributes exactly `x_1 ∪ H^1 +
//! H^1 ∪ x_3` of indeterminacy. Exhaustive enumeration of defining
//! systems stays available as an independent strategy, and the two are
//! cross-checked in the test suite.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::cohomology::{
    cocycle_space, coboundary_space, h_classes, is_coboundary, CohomClass, Cochain,
    CohomologyError, GModule,
};
use crate::embed::{hom_to_ds, lift_through_center, EmbedError};
use crate::groups::{GroupError, GroupHom};
use crate::limits::{Budget, BudgetExceeded, StepCounter};
use crate::linalg::RowReducer;
use crate::unipotent::{UnipotentError, UnitriangularGroup};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MasseyError {
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Unipotent(#[from] UnipotentError),
    #[error("expected {expected} input classes, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("fold count must be at least 2, got {0}")]
    FoldTooSmall(usize),
    #[error("Massey products require degree-1 classes with trivial one-dimensional coefficients")]
    InputShape,
    #[error("inputs live over different modules")]
    ModuleMismatch,
    #[error("defining system is missing entry ({i}, {j})")]
    EntryMissing { i: usize, j: usize },
    #[error("defining system has unexpected entry ({i}, {j})")]
    EntryUnexpected { i: usize, j: usize },
    #[error("entry ({i}, {j}) is not a 1-cochain over the system's module")]
    EntryShape { i: usize, j: usize },
    #[error("defining system violates {0}")]
    Invalid(DefiningSystemViolation),
}

/// The first condition of the defining-system definition that fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefiningSystemViolation {
    #[error("condition (1): entry ({index},{}) does not represent input class {index}", index + 1)]
    RepresentsInput { index: usize },
    #[error("condition (2): the coboundary of entry ({i},{j}) differs from the cup sum")]
    CoboundaryEquation { i: usize, j: usize },
}

/// A defining system for an `n`-fold product: 1-cochains `a_ij` for
/// `1 ≤ i < j ≤ n+1`, `(i,j) ≠ (1, n+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiningSystem {
    n: usize,
    module: Arc<GModule>,
    entries: BTreeMap<(usize, usize), Cochain>,
}

/// The index pairs of a defining system, stratified by interval length.
pub fn system_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for gap in 1..=n {
        for i in 1..=(n + 1 - gap) {
            let j = i + gap;
            if (i, j) != (1, n + 1) {
                out.push((i, j));
            }
        }
    }
    out
}

impl DefiningSystem {
    pub fn new(
        n: usize,
        module: Arc<GModule>,
        entries: BTreeMap<(usize, usize), Cochain>,
    ) -> Result<DefiningSystem, MasseyError> {
        if n < 2 {
            return Err(MasseyError::FoldTooSmall(n));
        }
        if !module.is_trivial() || module.dim() != 1 {
            return Err(MasseyError::InputShape);
        }
        let expected = system_pairs(n);
        for &(i, j) in &expected {
            match entries.get(&(i, j)) {
                None => return Err(MasseyError::EntryMissing { i, j }),
                Some(c) => {
                    if c.degree() != 1 || c.module().fingerprint() != module.fingerprint() {
                        return Err(MasseyError::EntryShape { i, j });
                    }
                }
            }
        }
        for &(i, j) in entries.keys() {
            if !expected.contains(&(i, j)) {
                return Err(MasseyError::EntryUnexpected { i, j });
            }
        }
        Ok(DefiningSystem { n, module, entries })
    }

    pub fn zero(
        n: usize,
        module: Arc<GModule>,
        budget: &Budget,
    ) -> Result<DefiningSystem, MasseyError> {
        let mut entries = BTreeMap::new();
        for (i, j) in system_pairs(n) {
            entries.insert((i, j), Cochain::zero(Arc::clone(&module), 1, budget)?);
        }
        DefiningSystem::new(n, module, entries)
    }

    pub fn fold(&self) -> usize {
        self.n
    }

    pub fn module(&self) -> &Arc<GModule> {
        &self.module
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<&Cochain, MasseyError> {
        self.entries.get(&(i, j)).ok_or(MasseyError::EntryMissing { i, j })
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Cochain> {
        &self.entries
    }

    /// The cup sum `Σ_{l=i+1}^{j-1} a_il ∪ a_lj` that the coboundary of
    /// `a_ij` must equal.
    fn cup_sum(&self, i: usize, j: usize, budget: &Budget) -> Result<Cochain, MasseyError> {
        let mut sum = Cochain::zero(Arc::clone(&self.module), 2, budget)?;
        for l in (i + 1)..j {
            let term = self.entry(i, l)?.cup(self.entry(l, j)?, budget)?;
            sum.add_assign(&term)?;
        }
        Ok(sum)
    }

    /// First violated condition against the given input classes, or
    /// `None` when the system is valid.
    pub fn validate(
        &self,
        inputs: &[CohomClass],
        budget: &Budget,
    ) -> Result<Option<DefiningSystemViolation>, MasseyError> {
        if inputs.len() != self.n {
            return Err(MasseyError::ArityMismatch { expected: self.n, got: inputs.len() });
        }
        for (index, input) in inputs.iter().enumerate() {
            let i = index + 1;
            let entry = self.entry(i, i + 1)?;
            if entry.cocycle_violation(budget)?.is_some() {
                return Ok(Some(DefiningSystemViolation::RepresentsInput { index }));
            }
            let class = CohomClass::new(entry.clone(), budget)?;
            if !class.same_class(input, budget)? {
                return Ok(Some(DefiningSystemViolation::RepresentsInput { index }));
            }
        }
        if let Some(v) = self.coboundary_equations_violation(budget)? {
            return Ok(Some(v));
        }
        Ok(None)
    }

    /// Condition (2) alone, which does not depend on the input classes.
    pub fn coboundary_equations_violation(
        &self,
        budget: &Budget,
    ) -> Result<Option<DefiningSystemViolation>, MasseyError> {
        for (i, j) in system_pairs(self.n) {
            if j == i + 1 {
                continue;
            }
            let lhs = self.entry(i, j)?.coboundary(budget)?;
            let rhs = self.cup_sum(i, j, budget)?;
            if lhs != rhs {
                return Ok(Some(DefiningSystemViolation::CoboundaryEquation { i, j }));
            }
        }
        Ok(None)
    }

    /// The value class `[Σ_{k=2}^{n} a_{1k} ∪ a_{k,n+1}]`, certified a
    /// cocycle. Condition (2) is re-checked first.
    pub fn value(&self, budget: &Budget) -> Result<CohomClass, MasseyError> {
        if let Some(v) = self.coboundary_equations_violation(budget)? {
            return Err(MasseyError::Invalid(v));
        }
        Ok(CohomClass::new(self.value_cochain(budget)?, budget)?)
    }

    /// The raw value cochain without validation or certification.
    pub fn value_cochain(&self, budget: &Budget) -> Result<Cochain, MasseyError> {
        let mut sum = Cochain::zero(Arc::clone(&self.module), 2, budget)?;
        for k in 2..=self.n {
            let term = self.entry(1, k)?.cup(self.entry(k, self.n + 1)?, budget)?;
            sum.add_assign(&term)?;
        }
        Ok(sum)
    }
}

/// The triple product value set: a particular class plus the span of the
/// indeterminacy basis, together with the defining system that produced
/// the particular value.
#[derive(Debug, Clone)]
pub struct MasseyValueCoset {
    pub particular: CohomClass,
    pub indeterminacy_basis: Vec<CohomClass>,
    pub system: DefiningSystem,
}

/// Outcome of the triple product: undefined with the obstructing cup, or
/// the full value coset.
#[derive(Debug, Clone)]
pub enum TripleProduct {
    Undefined { pair: (usize, usize), cup: CohomClass },
    Defined(MasseyValueCoset),
}

fn check_inputs(inputs: &[CohomClass], n: usize) -> Result<Arc<GModule>, MasseyError> {
    if inputs.len() != n {
        return Err(MasseyError::ArityMismatch { expected: n, got: inputs.len() });
    }
    let module = Arc::clone(inputs[0].module());
    if !module.is_trivial() || module.dim() != 1 {
        return Err(MasseyError::InputShape);
    }
    for c in inputs {
        if c.degree() != 1 {
            return Err(MasseyError::InputShape);
        }
        if c.module().fingerprint() != module.fingerprint() {
            return Err(MasseyError::ModuleMismatch);
        }
    }
    Ok(module)
}

/// The triple Massey product `⟨x1, x2, x3⟩` as an exact coset of
/// `x1 ∪ H^1 + H^1 ∪ x3` in `H^2`, or the obstructing nonzero cup.
pub fn triple_massey(
    inputs: &[CohomClass],
    budget: &Budget,
) -> Result<TripleProduct, MasseyError> {
    let module = check_inputs(inputs, 3)?;
    let reps: Vec<&Cochain> = inputs.iter().map(CohomClass::representative).collect();

    let cup12 = reps[0].cup(reps[1], budget)?;
    let a13 = match is_coboundary(&cup12, budget)? {
        Some(w) => w,
        None => {
            return Ok(TripleProduct::Undefined {
                pair: (1, 2),
                cup: CohomClass::new(cup12, budget)?,
            })
        }
    };
    let cup23 = reps[1].cup(reps[2], budget)?;
    let a24 = match is_coboundary(&cup23, budget)? {
        Some(w) => w,
        None => {
            return Ok(TripleProduct::Undefined {
                pair: (2, 3),
                cup: CohomClass::new(cup23, budget)?,
            })
        }
    };

    let mut entries = BTreeMap::new();
    entries.insert((1, 2), reps[0].clone());
    entries.insert((2, 3), reps[1].clone());
    entries.insert((3, 4), reps[2].clone());
    entries.insert((1, 3), a13);
    entries.insert((2, 4), a24);
    let system = DefiningSystem::new(3, Arc::clone(&module), entries)?;
    let particular = system.value(budget)?;

    // Freedom in a13 sweeps to z ∪ x3, freedom in a24 to x1 ∪ z, with z
    // ranging over 1-cocycles; on classes this is x1∪H^1 + H^1∪x3.
    let h1 = h_classes(&module, 1, budget)?;
    let b2 = coboundary_space(&module, 2, budget)?;
    let width = particular.representative().table().len();
    let mut span = RowReducer::new(module.modulus(), width);
    for cb in &b2 {
        span.push(cb.table().clone());
    }
    let mut indeterminacy_basis = Vec::new();
    for h in &h1 {
        for cochain in [
            reps[0].cup(h.representative(), budget)?,
            h.representative().cup(reps[2], budget)?,
        ] {
            if span.push(cochain.table().clone()) {
                indeterminacy_basis.push(CohomClass::new(cochain, budget)?);
            }
        }
    }
    Ok(TripleProduct::Defined(MasseyValueCoset { particular, indeterminacy_basis, system }))
}

/// Whether the zero class lies in the value coset.
pub fn contains_zero(
    coset: &MasseyValueCoset,
    budget: &Budget,
) -> Result<bool, MasseyError> {
    let module = coset.particular.module();
    let b2 = coboundary_space(module, 2, budget)?;
    let width = coset.particular.representative().table().len();
    let mut span = RowReducer::new(module.modulus(), width);
    for cb in &b2 {
        span.push(cb.table().clone());
    }
    for ind in &coset.indeterminacy_basis {
        span.push(ind.representative().table().clone());
    }
    Ok(span.contains(coset.particular.representative().table()))
}

/// Strategy for the n-fold vanishing decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Budgeted exhaustive search over all defining systems.
    Enumerate,
    /// Search homomorphisms into the corner quotient of the unitriangular
    /// group with prescribed superdiagonal, then lift through the center.
    Dwyer,
}

/// Witness attached to a vanishing verdict.
#[derive(Debug, Clone)]
pub enum NfoldVerdict {
    /// No defining system exists; for the first obstructed interval the
    /// unsolvable coboundary equation's right side is reported.
    Undefined { obstruction: Option<(usize, usize, CohomClass)> },
    /// Some defining system has value zero in `H^2`; the lift certificate
    /// is present when the Dwyer strategy produced one.
    ContainsZero { system: DefiningSystem, lift: Option<GroupHom> },
    /// Defining systems exist, but every one has nonzero value.
    DefinedNotVanishing { system: DefiningSystem },
}

/// Decide whether the n-fold product of `inputs` is defined and contains
/// zero.
pub fn nfold_vanishes(
    inputs: &[CohomClass],
    strategy: Strategy,
    budget: &Budget,
) -> Result<NfoldVerdict, MasseyError> {
    if inputs.len() < 2 {
        return Err(MasseyError::FoldTooSmall(inputs.len()));
    }
    let module = check_inputs(inputs, inputs.len())?;
    match strategy {
        Strategy::Enumerate => enumerate_vanishes(inputs, &module, budget),
        Strategy::Dwyer => dwyer_vanishes(inputs, &module, budget),
    }
}

struct SystemSearch<'a> {
    n: usize,
    module: Arc<GModule>,
    budget: &'a Budget,
    kernel: Vec<Cochain>,
    pairs: Vec<(usize, usize)>,
    counter: StepCounter,
    visit_all: bool,
    found: Vec<DefiningSystem>,
    zero_value: Option<DefiningSystem>,
    first_complete: Option<DefiningSystem>,
    obstruction: Option<(usize, usize, CohomClass)>,
}

impl SystemSearch<'_> {
    fn dfs(
        &mut self,
        depth: usize,
        entries: &mut BTreeMap<(usize, usize), Cochain>,
    ) -> Result<bool, MasseyError> {
        if depth == self.pairs.len() {
            let system =
                DefiningSystem::new(self.n, Arc::clone(&self.module), entries.clone())?;
            if self.first_complete.is_none() {
                self.first_complete = Some(system.clone());
            }
            let value = system.value_cochain(self.budget)?;
            if self.zero_value.is_none() && is_coboundary(&value, self.budget)?.is_some() {
                self.zero_value = Some(system.clone());
                if !self.visit_all {
                    return Ok(true);
                }
            }
            if self.visit_all {
                self.found.push(system);
            }
            return Ok(false);
        }
        let (i, j) = self.pairs[depth];
        let probe = DefiningSystem {
            n: self.n,
            module: Arc::clone(&self.module),
            entries: entries.clone(),
        };
        let rhs = probe.cup_sum(i, j, self.budget)?;
        let particular = match is_coboundary(&rhs, self.budget)? {
            Some(w) => w,
            None => {
                if self.obstruction.is_none() {
                    self.obstruction = Some((i, j, CohomClass::new(rhs, self.budget)?));
                }
                return Ok(false);
            }
        };
        let mut coeffs = vec![0u32; self.kernel.len()];
        loop {
            self.counter.tick()?;
            let mut choice = particular.clone();
            for (c, z) in coeffs.iter().zip(self.kernel.iter()) {
                if *c != 0 {
                    let mut scaled = z.clone();
                    scaled.scale_assign(*c);
                    choice.add_assign(&scaled)?;
                }
            }
            entries.insert((i, j), choice);
            if self.dfs(depth + 1, entries)? {
                return Ok(true);
            }
            entries.remove(&(i, j));
            if !increment(&mut coeffs, self.module.modulus().get()) {
                break;
            }
        }
        Ok(false)
    }
}

fn increment(coeffs: &mut [u32], p: u32) -> bool {
    for c in coeffs.iter_mut() {
        *c += 1;
        if *c < p {
            return true;
        }
        *c = 0;
    }
    false
}

fn enumerate_vanishes(
    inputs: &[CohomClass],
    module: &Arc<GModule>,
    budget: &Budget,
) -> Result<NfoldVerdict, MasseyError> {
    let mut search = system_search(inputs, module, budget, false)?;
    let mut entries = seed_entries(inputs);
    search.dfs(0, &mut entries)?;
    finish_verdict(search)
}

/// Every valid defining system with the inputs' representatives on the
/// superdiagonal, in deterministic search order.
pub fn enumerate_defining_systems(
    inputs: &[CohomClass],
    budget: &Budget,
) -> Result<Vec<DefiningSystem>, MasseyError> {
    let module = check_inputs(inputs, inputs.len())?;
    let mut search = system_search(inputs, &module, budget, true)?;
    let mut entries = seed_entries(inputs);
    search.dfs(0, &mut entries)?;
    Ok(search.found)
}

fn system_search<'a>(
    inputs: &[CohomClass],
    module: &Arc<GModule>,
    budget: &'a Budget,
    visit_all: bool,
) -> Result<SystemSearch<'a>, MasseyError> {
    let n = inputs.len();
    let kernel = cocycle_space(module, 1, budget)?;
    let pairs: Vec<(usize, usize)> =
        system_pairs(n).into_iter().filter(|&(i, j)| j > i + 1).collect();
    Ok(SystemSearch {
        n,
        module: Arc::clone(module),
        budget,
        kernel,
        pairs,
        counter: StepCounter::new("defining-system search", budget.enum_steps),
        visit_all,
        found: Vec::new(),
        zero_value: None,
        first_complete: None,
        obstruction: None,
    })
}

fn seed_entries(inputs: &[CohomClass]) -> BTreeMap<(usize, usize), Cochain> {
    let mut entries = BTreeMap::new();
    for (index, class) in inputs.iter().enumerate() {
        let i = index + 1;
        entries.insert((i, i + 1), class.representative().clone());
    }
    entries
}

fn finish_verdict(search: SystemSearch<'_>) -> Result<NfoldVerdict, MasseyError> {
    if let Some(system) = search.zero_value {
        return Ok(NfoldVerdict::ContainsZero { system, lift: None });
    }
    if let Some(system) = search.first_complete {
        return Ok(NfoldVerdict::DefinedNotVanishing { system });
    }
    Ok(NfoldVerdict::Undefined { obstruction: search.obstruction })
}

fn dwyer_vanishes(
    inputs: &[CohomClass],
    module: &Arc<GModule>,
    budget: &Budget,
) -> Result<NfoldVerdict, MasseyError> {
    let n = inputs.len();
    let p = module.modulus();
    let group = Arc::clone(module.group());
    let total = UnitriangularGroup::full(n + 1, p.get(), budget)?;
    let quotient = UnitriangularGroup::corner_quotient(n + 1, p.get(), budget)?;

    // Candidate images per generator: quotient elements whose
    // superdiagonal equals the negated input characters.
    let gens = group.generators();
    let mut candidate_lists: Vec<Vec<u32>> = Vec::with_capacity(gens.len());
    for &g in gens {
        let wanted: Vec<u32> =
            inputs.iter().map(|c| p.neg(c.representative().scalar(&[g]))).collect();
        let list: Vec<u32> = (0..quotient.order() as u32)
            .filter(|&u| quotient.superdiagonal(u) == wanted)
            .collect();
        candidate_lists.push(list);
    }

    let mut counter = StepCounter::new("quotient homomorphism search", budget.enum_steps);
    let mut first_hom: Option<GroupHom> = None;
    if candidate_lists.iter().all(|list| !list.is_empty()) {
        let mut picks = vec![0usize; gens.len()];
        loop {
            counter.tick()?;
            let images: Vec<u32> = picks
                .iter()
                .zip(candidate_lists.iter())
                .map(|(&c, list)| list[c])
                .collect();
            if let Ok(rho_bar) = GroupHom::from_generator_images(
                Arc::clone(&group),
                Arc::clone(quotient.group()),
                gens,
                &images,
            ) {
                if let Some(lift) = lift_through_center(&rho_bar, &total, &quotient, budget)
                    .map_err(box_embed)?
                {
                    let system = hom_to_ds(&rho_bar, &quotient, budget).map_err(box_embed)?;
                    return Ok(NfoldVerdict::ContainsZero { system, lift: Some(lift) });
                }
                if first_hom.is_none() {
                    first_hom = Some(rho_bar);
                }
            }
            // Advance the mixed-radix pick vector.
            let mut done = true;
            for (c, list) in picks.iter_mut().zip(candidate_lists.iter()) {
                *c += 1;
                if *c < list.len() {
                    done = false;
                    break;
                }
                *c = 0;
            }
            if done {
                break;
            }
        }
    }

    match first_hom {
        Some(rho_bar) => {
            let system = hom_to_ds(&rho_bar, &quotient, budget).map_err(box_embed)?;
            Ok(NfoldVerdict::DefinedNotVanishing { system })
        }
        None => {
            // Report the first obstructed cup among consecutive inputs,
            // when one exists at the shallowest stratum.
            let mut obstruction = None;
            for idx in 0..n - 1 {
                let cup = inputs[idx]
                    .representative()
                    .cup(inputs[idx + 1].representative(), budget)?;
                if is_coboundary(&cup, budget)?.is_none() {
                    obstruction =
                        Some((idx + 1, idx + 3, CohomClass::new(cup, budget)?));
                    break;
                }
            }
            Ok(NfoldVerdict::Undefined { obstruction })
        }
    }
}

fn box_embed(e: EmbedError) -> MasseyError {
    match e {
        EmbedError::Cohomology(c) => MasseyError::Cohomology(c),
        EmbedError::Group(g) => MasseyError::Group(g),
        EmbedError::Budget(b) => MasseyError::Budget(b),
        EmbedError::Unipotent(u) => MasseyError::Unipotent(u),
        EmbedError::Massey(m) => m,
        other => MasseyError::Group(GroupError::InvalidParameter(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::FiniteGroup;
    use crate::linalg::Prime;

    fn budget() -> Budget {
        Budget::default()
    }

    fn trivial_module(order: usize, p: u32) -> Arc<GModule> {
        let g = Arc::new(FiniteGroup::cyclic(order).unwrap());
        GModule::trivial(g, Prime::new(p).unwrap(), 1)
    }

    fn character(module: &Arc<GModule>, values: &[u32]) -> CohomClass {
        let rep =
            Cochain::from_generator_values(Arc::clone(module), values, &budget()).unwrap();
        CohomClass::new(rep, &budget()).unwrap()
    }

    #[test]
    fn zero_system_is_valid_for_zero_inputs() {
        let module = trivial_module(4, 2);
        let b = budget();
        let ds = DefiningSystem::zero(3, Arc::clone(&module), &b).unwrap();
        let zero = CohomClass::zero(Arc::clone(&module), 1, &b).unwrap();
        let inputs = vec![zero.clone(), zero.clone(), zero];
        assert_eq!(ds.validate(&inputs, &b).unwrap(), None);
        assert!(ds.value(&b).unwrap().is_zero_class(&b).unwrap());
    }

    #[test]
    fn perturbed_system_reports_condition_two() {
        let module = trivial_module(4, 2);
        let b = budget();
        let chi = character(&module, &[1]);
        let inputs = vec![chi.clone(), chi.clone(), chi.clone()];
        let systems = enumerate_defining_systems(&inputs, &b).unwrap();
        assert!(!systems.is_empty());
        let mut broken = systems[0].clone();
        // a13 += a one-cochain that is not a cocycle.
        let mut bump = Cochain::zero(Arc::clone(&module), 1, &b).unwrap();
        bump.set_scalar(&[1], 1);
        bump.set_scalar(&[2], 1);
        assert!(bump.cocycle_violation(&b).unwrap().is_some());
        let mut a13 = broken.entries[&(1, 3)].clone();
        a13.add_assign(&bump).unwrap();
        broken.entries.insert((1, 3), a13);
        assert_eq!(
            broken.validate(&inputs, &b).unwrap(),
            Some(DefiningSystemViolation::CoboundaryEquation { i: 1, j: 3 })
        );
    }

    #[test]
    fn wrong_representative_reports_condition_one() {
        let module = trivial_module(4, 2);
        let b = budget();
        let chi = character(&module, &[1]);
        let zero = CohomClass::zero(Arc::clone(&module), 1, &b).unwrap();
        let ds = DefiningSystem::zero(3, Arc::clone(&module), &b).unwrap();
        let inputs = vec![chi, zero.clone(), zero];
        assert_eq!(
            ds.validate(&inputs, &b).unwrap(),
            Some(DefiningSystemViolation::RepresentsInput { index: 0 })
        );
    }

    #[test]
    fn triple_on_z4_matches_enumeration_oracle() {
        let module = trivial_module(4, 2);
        let b = budget();
        let chi = character(&module, &[1]);
        let inputs = vec![chi.clone(), chi.clone(), chi.clone()];

        let product = triple_massey(&inputs, &b).unwrap();
        let coset = match product {
            TripleProduct::Defined(c) => c,
            TripleProduct::Undefined { .. } => panic!("⟨χ,χ,χ⟩ is defined on Z/4"),
        };
        assert!(contains_zero(&coset, &b).unwrap());

        // Oracle: enumerate every defining system and collect the set of
        // value classes as canonical residues modulo coboundaries.
        let systems = enumerate_defining_systems(&inputs, &b).unwrap();
        assert!(!systems.is_empty());
        let b2 = coboundary_space(&module, 2, &b).unwrap();
        let mut modb = RowReducer::new(module.modulus(), 16);
        for cb in &b2 {
            modb.push(cb.table().clone());
        }
        let mut enumerated = std::collections::BTreeSet::new();
        for ds in &systems {
            assert_eq!(ds.validate(&inputs, &b).unwrap(), None);
            let mut v = ds.value_cochain(&b).unwrap().table().clone();
            modb.reduce(&mut v);
            enumerated.insert(v.to_u32_vec());
        }
        // Coset side: particular + every combination of the indeterminacy.
        let mut coset_set = std::collections::BTreeSet::new();
        let dim = coset.indeterminacy_basis.len();
        let p = module.modulus().get();
        let mut coeffs = vec![0u32; dim];
        loop {
            let mut v = coset.particular.representative().clone();
            for (c, basis) in coeffs.iter().zip(coset.indeterminacy_basis.iter()) {
                let mut scaled = basis.representative().clone();
                scaled.scale_assign(*c);
                v.add_assign(&scaled).unwrap();
            }
            let mut t = v.table().clone();
            modb.reduce(&mut t);
            coset_set.insert(t.to_u32_vec());
            if !increment(&mut coeffs, p) {
                break;
            }
        }
        assert_eq!(enumerated, coset_set);
        // The frozen expectation: the triple product on Z/4 is {0}.
        assert_eq!(enumerated.len(), 1);
        assert!(enumerated.contains(&vec![0u32; 16]));
    }

    #[test]
    fn undefined_when_first_cup_does_not_vanish() {
        let g = Arc::new(FiniteGroup::elementary_abelian(2, 2).unwrap());
        let module = GModule::trivial(g, Prime::new(2).unwrap(), 1);
        let b = budget();
        let chi1 = character(&module, &[1, 0]);
        let chi2 = character(&module, &[0, 1]);
        let product = triple_massey(&[chi1.clone(), chi2, chi1.clone()], &b).unwrap();
        match product {
            TripleProduct::Undefined { pair, cup } => {
                assert_eq!(pair, (1, 2));
                assert!(!cup.is_zero_class(&b).unwrap());
            }
            TripleProduct::Defined(_) => panic!("χ1∪χ2 ≠ 0 must make the product undefined"),
        }
    }

    #[test]
    fn middle_zero_class_gives_coset_containing_zero() {
        let module = trivial_module(8, 2);
        let b = budget();
        let chi = character(&module, &[1]);
        let zero = CohomClass::zero(Arc::clone(&module), 1, &b).unwrap();
        let product = triple_massey(&[chi.clone(), zero, chi], &b).unwrap();
        match product {
            TripleProduct::Defined(coset) => assert!(contains_zero(&coset, &b).unwrap()),
            TripleProduct::Undefined { .. } => panic!("zero middle class is always defined"),
        }
    }

    #[test]
    fn contains_zero_nonzero_particular_empty_indeterminacy() {
        let module = trivial_module(2, 2);
        let b = budget();
        let chi = character(&module, &[1]);
        let sq = chi.representative().cup(chi.representative(), &b).unwrap();
        let coset = MasseyValueCoset {
            particular: CohomClass::new(sq, &b).unwrap(),
            indeterminacy_basis: Vec::new(),
            system: DefiningSystem::zero(3, Arc::clone(&module), &b).unwrap(),
        };
        assert!(!contains_zero(&coset, &b).unwrap());
    }

    #[test]
    fn twofold_reduces_to_cup() {
        let b = budget();
        for (order, gen_value, expect_zero) in [(2usize, 1u32, false), (4, 1, true)] {
            let module = trivial_module(order, 2);
            let chi = character(&module, &[gen_value]);
            let verdict =
                nfold_vanishes(&[chi.clone(), chi.clone()], Strategy::Enumerate, &b).unwrap();
            let cup = chi.representative().cup(chi.representative(), &b).unwrap();
            let cup_zero = is_coboundary(&cup, &b).unwrap().is_some();
            assert_eq!(cup_zero, expect_zero);
            match verdict {
                NfoldVerdict::ContainsZero { .. } => assert!(cup_zero),
                NfoldVerdict::DefinedNotVanishing { .. } => assert!(!cup_zero),
                NfoldVerdict::Undefined { .. } => panic!("2-fold products are always defined"),
            }
        }
    }

    #[test]
    fn strategies_agree_on_triple_products() {
        let b = budget();
        let groups: Vec<Arc<FiniteGroup>> = vec![
            Arc::new(FiniteGroup::cyclic(2).unwrap()),
            Arc::new(FiniteGroup::cyclic(4).unwrap()),
            Arc::new(FiniteGroup::elementary_abelian(2, 2).unwrap()),
            Arc::new(FiniteGroup::cyclic(8).unwrap()),
        ];
        for g in groups {
            let module = GModule::trivial(Arc::clone(&g), Prime::new(2).unwrap(), 1);
            let z1 = cocycle_space(&module, 1, &b).unwrap();
            // All triples of 1-cocycle classes (coboundaries vanish in
            // degree 1 with trivial coefficients, so cocycles are classes).
            let mut classes = vec![CohomClass::zero(Arc::clone(&module), 1, &b).unwrap()];
            let mut coeffs = vec![0u32; z1.len()];
            while increment(&mut coeffs, 2) {
                let mut rep = Cochain::zero(Arc::clone(&module), 1, &b).unwrap();
                for (c, z) in coeffs.iter().zip(z1.iter()) {
                    if *c != 0 {
                        rep.add_assign(z).unwrap();
                    }
                }
                classes.push(CohomClass::new(rep, &b).unwrap());
            }
            for x1 in &classes {
                for x2 in &classes {
                    for x3 in &classes {
                        let inputs = vec![x1.clone(), x2.clone(), x3.clone()];
                        let by_enum =
                            nfold_vanishes(&inputs, Strategy::Enumerate, &b).unwrap();
                        let by_dwyer = nfold_vanishes(&inputs, Strategy::Dwyer, &b).unwrap();
                        assert_eq!(
                            verdict_kind(&by_enum),
                            verdict_kind(&by_dwyer),
                            "strategy disagreement on |G|={}",
                            g.order()
                        );
                        // Triple product machinery must agree as well.
                        let product = triple_massey(&inputs, &b).unwrap();
                        match (&by_enum, &product) {
                            (NfoldVerdict::Undefined { .. }, TripleProduct::Undefined { .. }) => {}
                            (
                                NfoldVerdict::ContainsZero { .. },
                                TripleProduct::Defined(coset),
                            ) => assert!(contains_zero(coset, &b).unwrap()),
                            (
                                NfoldVerdict::DefinedNotVanishing { .. },
                                TripleProduct::Defined(coset),
                            ) => assert!(!contains_zero(coset, &b).unwrap()),
                            other => panic!("verdict mismatch: {other:?}"),
                        }
                    }
                }
            }
        }
    }

    fn verdict_kind(v: &NfoldVerdict) -> u8 {
        match v {
            NfoldVerdict::Undefined { .. } => 0,
            NfoldVerdict::ContainsZero { .. } => 1,
            NfoldVerdict::DefinedNotVanishing { .. } => 2,
        }
    }

    #[test]
    fn dwyer_witnesses_validate() {
        let b = budget();
        let module = trivial_module(4, 2);
        let chi = character(&module, &[1]);
        let inputs = vec![chi.clone(), chi.clone(), chi.clone()];
        match nfold_vanishes(&inputs, Strategy::Dwyer, &b).unwrap() {
            NfoldVerdict::ContainsZero { system, lift } => {
                assert_eq!(system.validate(&inputs, &b).unwrap(), None);
                assert!(system.value(&b).unwrap().is_zero_class(&b).unwrap());
                let lift = lift.expect("dwyer strategy lifts explicitly");
                assert!(lift.source().order() == 4);
            }
            other => panic!("⟨χ,χ,χ⟩ on Z/4 contains zero, got {other:?}"),
        }
    }

    #[test]
    fn fourfold_smoke_on_klein_four() {
        let b = budget();
        let g = Arc::new(FiniteGroup::elementary_abelian(2, 2).unwrap());
        let module = GModule::trivial(g, Prime::new(2).unwrap(), 1);
        let zero = CohomClass::zero(Arc::clone(&module), 1, &b).unwrap();
        let inputs = vec![zero.clone(), zero.clone(), zero.clone(), zero];
        let by_enum = nfold_vanishes(&inputs, Strategy::Enumerate, &b).unwrap();
        let by_dwyer = nfold_vanishes(&inputs, Strategy::Dwyer, &b).unwrap();
        assert_eq!(verdict_kind(&by_enum), 1);
        assert_eq!(verdict_kind(&by_dwyer), 1);
    }

    #[test]
    fn representative_shift_leaves_coset_unchanged() {
        // With trivial coefficients every degree-0 coboundary is zero, so
        // shifted representatives coincide; the assertion documents the
        // representative-independence contract.
        let module = trivial_module(4, 2);
        let b = budget();
        let chi = character(&module, &[1]);
        let mut shift = Cochain::zero(Arc::clone(&module), 0, &b).unwrap();
        shift.set_scalar(&[], 1);
        let shifted = shift.coboundary(&b).unwrap();
        assert!(shifted.is_zero());
        let mut rep = chi.representative().clone();
        rep.add_assign(&shifted).unwrap();
        let chi_shifted = CohomClass::new(rep, &b).unwrap();
        let inputs_a = vec![chi.clone(), chi.clone(), chi.clone()];
        let inputs_b = vec![chi_shifted.clone(), chi_shifted.clone(), chi_shifted];
        let pa = triple_massey(&inputs_a, &b).unwrap();
        let pb = triple_massey(&inputs_b, &b).unwrap();
        match (pa, pb) {
            (TripleProduct::Defined(ca), TripleProduct::Defined(cb)) => {
                assert!(ca.particular.same_class(&cb.particular, &b).unwrap());
                assert_eq!(ca.indeterminacy_basis.len(), cb.indeterminacy_basis.len());
            }
            _ => panic!("both products are defined"),
        }
    }

    #[test]
    fn enumeration_respects_step_budget() {
        let module = trivial_module(8, 2);
        let tiny = Budget { enum_steps: 1, ..Budget::default() };
        let chi = character(&module, &[1]);
        let inputs = vec![chi.clone(), chi.clone(), chi.clone()];
        match nfold_vanishes(&inputs, Strategy::Enumerate, &tiny) {
            Err(MasseyError::Budget(BudgetExceeded { limit, .. })) => assert_eq!(limit, 1),
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
