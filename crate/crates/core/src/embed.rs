//! Weak embedding problems for finite groups: the correspondence
//! between defining systems and homomorphisms into the corner quotient
//! of a unitriangular group, lift searches, the obstruction class of an
//! extension with elementary-abelian kernel, and local-global
//! restriction arguments.
//!
//! An extension `1 → K → U → Q → 1` with `K` elementary abelian of
//! exponent `p` is carried around with a normalized set-theoretic
//! section and an explicit `F_p`-basis of `K`. Conjugation through the
//! section makes `K` a `Q`-module, the section's failure to be a
//! homomorphism is a 2-cocycle `ε`, and a problem `α: G → Q` has a weak
//! solution exactly when `α*(ε)` bounds — with the bounding cochain
//! converting directly into a solving homomorphism.

use std::sync::Arc;

use thiserror::Error;

use crate::cohomology::{
    is_coboundary, restricted_kernel_classes, CohomClass, Cochain, CohomologyError, GModule,
};
use crate::groups::{FiniteGroup, GroupError, GroupHom, Subgroup};
use crate::limits::{Budget, BudgetExceeded, StepCounter};
use crate::linalg::{LinalgError, Prime, RowReducer, VecP};
use crate::massey::{
    contains_zero, triple_massey, DefiningSystem, MasseyError, TripleProduct,
};
use crate::unipotent::{corner_projection, UnipotentError, UnitriangularGroup};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EmbedError {
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Unipotent(#[from] UnipotentError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Massey(#[from] MasseyError),
    #[error("homomorphism endpoints do not match the extension")]
    EndpointMismatch,
    #[error("kernel is not elementary abelian of exponent {p}")]
    KernelNotElementaryAbelian { p: u32 },
    #[error("projection is not surjective")]
    ProjectionNotSurjective,
    #[error("section does not split the projection at element {0}")]
    SectionMismatch(u32),
    #[error("kernel basis does not span the kernel")]
    KernelBasisInvalid,
    #[error("characters {0} and {1} have a nonzero cup product")]
    ObstructedCup(usize, usize),
    #[error("characters are linearly dependent")]
    DependentCharacters,
    #[error("triple product is undefined")]
    ProductUndefined,
    #[error("no lift exists")]
    NoLift,
}

/// An extension `1 → K → U → Q → 1` with elementary-abelian kernel,
/// normalized section, and the conjugation module structure on `K`.
#[derive(Debug, Clone)]
pub struct GroupExtension {
    projection: GroupHom,
    kernel: Subgroup,
    kernel_basis: Vec<u32>,
    /// Coordinates of each kernel member in the basis, indexed by the
    /// member's position in the sorted kernel.
    kernel_coords: Vec<VecP>,
    section: Vec<u32>,
    module: Arc<GModule>,
    p: Prime,
}

impl GroupExtension {
    /// Build from a surjection, choosing the least-index normalized
    /// section and a greedy kernel basis.
    pub fn from_projection(
        projection: GroupHom,
        p: Prime,
        budget: &Budget,
    ) -> Result<GroupExtension, EmbedError> {
        let total = Arc::clone(projection.source());
        let quotient = Arc::clone(projection.target());
        let mut section = vec![u32::MAX; quotient.order()];
        for u in 0..total.order() as u32 {
            let q = projection.apply(u) as usize;
            if section[q] == u32::MAX {
                section[q] = u;
            }
        }
        section[quotient.identity() as usize] = total.identity();
        let kernel = projection.kernel();
        let basis = greedy_kernel_basis(&total, kernel.members(), p)?;
        GroupExtension::with_section(projection, p, section, basis, budget)
    }

    /// Build from explicit section and kernel basis, both validated.
    pub fn with_section(
        projection: GroupHom,
        p: Prime,
        section: Vec<u32>,
        kernel_basis: Vec<u32>,
        budget: &Budget,
    ) -> Result<GroupExtension, EmbedError> {
        if !projection.is_surjective() {
            return Err(EmbedError::ProjectionNotSurjective);
        }
        let total = Arc::clone(projection.source());
        let quotient = Arc::clone(projection.target());
        if section.len() != quotient.order() {
            return Err(EmbedError::SectionMismatch(section.len() as u32));
        }
        for (q, &u) in section.iter().enumerate() {
            if u as usize >= total.order() || projection.apply(u) != q as u32 {
                return Err(EmbedError::SectionMismatch(q as u32));
            }
        }
        if section[quotient.identity() as usize] != total.identity() {
            return Err(EmbedError::SectionMismatch(quotient.identity()));
        }
        let kernel = projection.kernel();
        check_elementary_abelian(&total, kernel.members(), p)?;
        let kernel_coords = coordinate_kernel(&total, &kernel, &kernel_basis, p)?;

        // Conjugation through the section, with the action matrix of a
        // quotient element recorded column by column on the basis.
        let dim = kernel_basis.len();
        let mut action = Vec::with_capacity(quotient.order());
        for q in 0..quotient.order() as u32 {
            let s = section[q as usize];
            let s_inv = total.inv(s);
            let mut m = crate::linalg::MatP::zeros(p, dim, dim);
            for (j, &b) in kernel_basis.iter().enumerate() {
                let conj = total.mul(total.mul(s, b), s_inv);
                let idx =
                    kernel.index_of(conj).ok_or(EmbedError::KernelBasisInvalid)?;
                let coords = &kernel_coords[idx];
                for r in 0..dim {
                    m.set(r, j, coords.get(r));
                }
            }
            action.push(m);
        }
        let module = GModule::new(Arc::clone(&quotient), p, dim, action)?;
        let _ = budget;
        Ok(GroupExtension {
            projection,
            kernel,
            kernel_basis,
            kernel_coords,
            section,
            module,
            p,
        })
    }

    pub fn total(&self) -> &Arc<FiniteGroup> {
        self.projection.source()
    }

    pub fn quotient(&self) -> &Arc<FiniteGroup> {
        self.projection.target()
    }

    pub fn projection(&self) -> &GroupHom {
        &self.projection
    }

    pub fn kernel(&self) -> &Subgroup {
        &self.kernel
    }

    pub fn kernel_basis(&self) -> &[u32] {
        &self.kernel_basis
    }

    pub fn section(&self) -> &[u32] {
        &self.section
    }

    /// The conjugation module of the quotient on the kernel.
    pub fn module(&self) -> &Arc<GModule> {
        &self.module
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    /// Coordinates of a kernel member in the chosen basis.
    pub fn coords_of(&self, u: u32) -> Option<&VecP> {
        self.kernel.index_of(u).map(|i| &self.kernel_coords[i])
    }

    /// The kernel element with the given coordinates.
    pub fn element_from_coords(&self, coords: &VecP) -> u32 {
        let total = self.total();
        let mut out = total.identity();
        for (j, &b) in self.kernel_basis.iter().enumerate() {
            for _ in 0..coords.get(j) {
                out = total.mul(out, b);
            }
        }
        out
    }

    /// The 2-cocycle `ε(q, r) = s(q) s(r) s(qr)^{-1}` in kernel
    /// coordinates, certified as a class in `H^2(Q, K)`.
    pub fn extension_class(&self, budget: &Budget) -> Result<CohomClass, EmbedError> {
        Ok(CohomClass::new(self.extension_cochain(budget)?, budget)?)
    }

    /// The raw extension cocycle table.
    pub fn extension_cochain(&self, budget: &Budget) -> Result<Cochain, EmbedError> {
        let total = self.total();
        let quotient = self.quotient();
        let mut eps = Cochain::zero(Arc::clone(&self.module), 2, budget)?;
        for q in 0..quotient.order() as u32 {
            for r in 0..quotient.order() as u32 {
                let prod = total.mul(self.section[q as usize], self.section[r as usize]);
                let back = total.inv(self.section[quotient.mul(q, r) as usize]);
                let k = total.mul(prod, back);
                let coords =
                    self.coords_of(k).ok_or(EmbedError::KernelBasisInvalid)?.clone();
                eps.set_value(&[q, r], &coords);
            }
        }
        Ok(eps)
    }
}

fn check_elementary_abelian(
    total: &FiniteGroup,
    members: &[u32],
    p: Prime,
) -> Result<(), EmbedError> {
    for &a in members {
        if a != total.identity() && total.element_order(a) != p.get() as usize {
            return Err(EmbedError::KernelNotElementaryAbelian { p: p.get() });
        }
        for &b in members {
            if total.mul(a, b) != total.mul(b, a) {
                return Err(EmbedError::KernelNotElementaryAbelian { p: p.get() });
            }
        }
    }
    Ok(())
}

fn greedy_kernel_basis(
    total: &FiniteGroup,
    members: &[u32],
    p: Prime,
) -> Result<Vec<u32>, EmbedError> {
    let mut basis: Vec<u32> = Vec::new();
    let mut span = vec![total.identity()];
    for &m in members {
        if span.contains(&m) {
            continue;
        }
        let mut grown = Vec::new();
        for &s in &span {
            let mut x = s;
            for _ in 0..p.get() {
                grown.push(x);
                x = total.mul(x, m);
            }
        }
        grown.sort_unstable();
        grown.dedup();
        span = grown;
        basis.push(m);
    }
    if span.len() != members.len() {
        return Err(EmbedError::KernelBasisInvalid);
    }
    Ok(basis)
}

/// Coordinates of every kernel member in the given basis, indexed by
/// sorted-member position.
fn coordinate_kernel(
    total: &FiniteGroup,
    kernel: &Subgroup,
    basis: &[u32],
    p: Prime,
) -> Result<Vec<VecP>, EmbedError> {
    let dim = basis.len();
    let count = (p.get() as u64).checked_pow(dim as u32).unwrap_or(u64::MAX);
    if count != kernel.order() as u64 {
        return Err(EmbedError::KernelBasisInvalid);
    }
    let mut coords: Vec<Option<VecP>> = vec![None; kernel.order()];
    let mut digits = vec![0u32; dim];
    loop {
        let mut elem = total.identity();
        for (j, &b) in basis.iter().enumerate() {
            for _ in 0..digits[j] {
                elem = total.mul(elem, b);
            }
        }
        let idx = kernel.index_of(elem).ok_or(EmbedError::KernelBasisInvalid)?;
        if coords[idx].is_some() {
            return Err(EmbedError::KernelBasisInvalid);
        }
        coords[idx] = Some(VecP::from_u32s(p, &digits));
        if !advance(&mut digits, p.get()) {
            break;
        }
    }
    coords
        .into_iter()
        .map(|c| c.ok_or(EmbedError::KernelBasisInvalid))
        .collect()
}

fn advance(digits: &mut [u32], p: u32) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < p {
            return true;
        }
        *d = 0;
    }
    false
}

/// The extension `1 → A → U_4(F_p) → F_p^3 → 1` over the superdiagonal
/// projection, with the canonical monomial section and the kernel basis
/// whose coordinates match the kernel-coordinate convention of the
/// unipotent module.
pub fn superdiagonal_extension(p: u32, budget: &Budget) -> Result<GroupExtension, EmbedError> {
    let total = UnitriangularGroup::full(4, p, budget)?;
    let pr = total.modulus();
    let projection = total.superdiagonal_projection()?;
    let quotient = Arc::clone(projection.target());
    let mut section = vec![0u32; quotient.order()];
    for q in 0..quotient.order() as u32 {
        let mut rest = q;
        let mut digit = || {
            let d = rest % p;
            rest /= p;
            d
        };
        let (x, y, z) = (digit(), digit(), digit());
        section[q as usize] =
            total.element_with_entries(&[(1, 2, x), (2, 3, y), (3, 4, z)])?;
    }
    let kernel_basis = vec![
        total.element_with_entries(&[(2, 4, 1)])?,
        total.element_with_entries(&[(1, 3, 1)])?,
        total.element_with_entries(&[(1, 4, 1)])?,
    ];
    GroupExtension::with_section(projection, pr, section, kernel_basis, budget)
}

/// The central extension `1 → Z → U_{size}(F_p) → Ū_{size}(F_p) → 1`
/// over the corner projection, with the entry-preserving section.
pub fn center_extension(
    size: usize,
    p: u32,
    budget: &Budget,
) -> Result<GroupExtension, EmbedError> {
    let total = UnitriangularGroup::full(size, p, budget)?;
    let quotient = UnitriangularGroup::corner_quotient(size, p, budget)?;
    let projection = corner_projection(&total, &quotient)?;
    let mut section = vec![0u32; quotient.order()];
    for q in 0..quotient.order() as u32 {
        let entries: Vec<(usize, usize, u32)> = quotient
            .pairs()
            .iter()
            .map(|&(i, j)| Ok((i, j, quotient.entry(q, i, j)?)))
            .collect::<Result<_, UnipotentError>>()?;
        section[q as usize] = total.element_with_entries(&entries)?;
    }
    let kernel_basis = vec![total.element_with_entries(&[(1, size, 1)])?];
    GroupExtension::with_section(projection, total.modulus(), section, kernel_basis, budget)
}

/// A weak embedding problem: solve `β: G → U` with `projection ∘ β = α`.
#[derive(Debug, Clone)]
pub struct WeakEmbeddingProblem {
    alpha: GroupHom,
    extension: GroupExtension,
}

/// The obstruction pair of a problem: the extension class and its
/// pullback along `α`.
#[derive(Debug, Clone)]
pub struct Obstruction {
    pub epsilon: CohomClass,
    pub pulled_back: CohomClass,
}

/// Verdict of the obstruction computation, with a solving homomorphism
/// whenever the pulled-back class bounds.
#[derive(Debug, Clone)]
pub struct HoechsmannReport {
    pub solvable: bool,
    pub obstruction: Obstruction,
    pub witness: Option<GroupHom>,
}

impl WeakEmbeddingProblem {
    pub fn new(
        alpha: GroupHom,
        extension: GroupExtension,
    ) -> Result<WeakEmbeddingProblem, EmbedError> {
        if alpha.target().fingerprint() != extension.quotient().fingerprint() {
            return Err(EmbedError::EndpointMismatch);
        }
        Ok(WeakEmbeddingProblem { alpha, extension })
    }

    pub fn alpha(&self) -> &GroupHom {
        &self.alpha
    }

    pub fn extension(&self) -> &GroupExtension {
        &self.extension
    }

    /// The kernel module seen from `G`: the action composed with `α`.
    pub fn pulled_module(&self, _budget: &Budget) -> Result<Arc<GModule>, EmbedError> {
        let g = Arc::clone(self.alpha.source());
        let ext_module = self.extension.module();
        let action = (0..g.order() as u32)
            .map(|x| ext_module.act(self.alpha.apply(x)).clone())
            .collect();
        Ok(GModule::new(g, self.extension.p, ext_module.dim(), action)?)
    }

    /// The pullback `α*(ε)` as a cochain over `G`.
    pub fn pulled_cochain(&self, budget: &Budget) -> Result<Cochain, EmbedError> {
        let eps = self.extension.extension_cochain(budget)?;
        let module = self.pulled_module(budget)?;
        let g = self.alpha.source();
        let mut out = Cochain::zero(module, 2, budget)?;
        for x in 0..g.order() as u32 {
            for y in 0..g.order() as u32 {
                let v = eps.value(&[self.alpha.apply(x), self.alpha.apply(y)]);
                out.set_value(&[x, y], &v);
            }
        }
        Ok(out)
    }

    /// Solvability by the obstruction criterion: the problem has a weak
    /// solution exactly when `α*(ε)` is a coboundary, and a bounding
    /// cochain `b` converts into the solution `β(g) = k(−b(g))·s(α(g))`.
    pub fn hoechsmann_solvable(&self, budget: &Budget) -> Result<HoechsmannReport, EmbedError> {
        let epsilon = self.extension.extension_class(budget)?;
        let pulled = self.pulled_cochain(budget)?;
        let pulled_back = CohomClass::new(pulled.clone(), budget)?;
        let witness_cochain = is_coboundary(&pulled, budget)?;
        let witness = match witness_cochain {
            None => None,
            Some(b) => {
                let g = Arc::clone(self.alpha.source());
                let total = Arc::clone(self.extension.total());
                let p = self.extension.p;
                let images: Vec<u32> = (0..g.order() as u32)
                    .map(|x| {
                        let mut coords = b.value(&[x]);
                        coords.scale_assign(p.neg(1));
                        let k = self.extension.element_from_coords(&coords);
                        let s = self.extension.section()[self.alpha.apply(x) as usize];
                        total.mul(k, s)
                    })
                    .collect();
                Some(GroupHom::from_images(g, total, images)?)
            }
        };
        Ok(HoechsmannReport {
            solvable: witness.is_some(),
            obstruction: Obstruction { epsilon, pulled_back },
            witness,
        })
    }

    /// Complete backtracking search for a weak solution over generator
    /// images, in lexicographic element order.
    pub fn direct_weak_solution(
        &self,
        budget: &Budget,
    ) -> Result<Option<GroupHom>, EmbedError> {
        let g = Arc::clone(self.alpha.source());
        let total = Arc::clone(self.extension.total());
        let mut fibers: Vec<Vec<u32>> = vec![Vec::new(); self.extension.quotient().order()];
        for u in 0..total.order() as u32 {
            fibers[self.extension.projection.apply(u) as usize].push(u);
        }
        let gens = g.generators();
        let lists: Vec<&[u32]> = gens
            .iter()
            .map(|&x| fibers[self.alpha.apply(x) as usize].as_slice())
            .collect();
        let mut counter = StepCounter::new("weak solution search", budget.enum_steps);
        let mut picks = vec![0usize; gens.len()];
        if lists.iter().any(|l| l.is_empty()) {
            return Ok(None);
        }
        loop {
            counter.tick()?;
            let images: Vec<u32> =
                picks.iter().zip(lists.iter()).map(|(&c, l)| l[c]).collect();
            if let Ok(hom) = GroupHom::from_generator_images(
                Arc::clone(&g),
                Arc::clone(&total),
                gens,
                &images,
            ) {
                // A generator-wise fiber choice solves the problem only if
                // the whole hom covers alpha.
                let covers = (0..g.order() as u32)
                    .all(|x| self.extension.projection.apply(hom.apply(x)) == self.alpha.apply(x));
                if covers {
                    return Ok(Some(hom));
                }
            }
            let mut done = true;
            for (c, l) in picks.iter_mut().zip(lists.iter()) {
                *c += 1;
                if *c < l.len() {
                    done = false;
                    break;
                }
                *c = 0;
            }
            if done {
                return Ok(None);
            }
        }
    }
}

/// The homomorphism `G → Ū_{n+1}(F_p)` whose entries are the negated
/// defining-system entries.
pub fn ds_to_hom(
    ds: &DefiningSystem,
    budget: &Budget,
) -> Result<GroupHom, EmbedError> {
    let module = ds.module();
    let quotient =
        UnitriangularGroup::corner_quotient(ds.fold() + 1, module.modulus().get(), budget)?;
    ds_to_hom_into(ds, &quotient)
}

/// The same correspondence with a caller-supplied corner quotient, for
/// converting many systems of one shape without rebuilding the group.
pub fn ds_to_hom_into(
    ds: &DefiningSystem,
    quotient: &UnitriangularGroup,
) -> Result<GroupHom, EmbedError> {
    let module = ds.module();
    let p = module.modulus();
    if !quotient.is_corner_omitted()
        || quotient.size() != ds.fold() + 1
        || quotient.modulus() != p
    {
        return Err(EmbedError::EndpointMismatch);
    }
    let g = Arc::clone(module.group());
    let mut images = Vec::with_capacity(g.order());
    for x in 0..g.order() as u32 {
        let entries: Vec<(usize, usize, u32)> = quotient
            .pairs()
            .iter()
            .map(|&(i, j)| Ok((i, j, p.neg(ds.entry(i, j)?.scalar(&[x])))))
            .collect::<Result<_, MasseyError>>()?;
        images.push(quotient.element_with_entries(&entries)?);
    }
    Ok(GroupHom::from_images(g, Arc::clone(quotient.group()), images)?)
}

/// The defining system read off a homomorphism into a corner quotient:
/// `a_ij = −(ρ̄)_ij`.
pub fn hom_to_ds(
    rho_bar: &GroupHom,
    quotient: &UnitriangularGroup,
    budget: &Budget,
) -> Result<DefiningSystem, EmbedError> {
    if !quotient.is_corner_omitted()
        || rho_bar.target().fingerprint() != quotient.group().fingerprint()
    {
        return Err(EmbedError::EndpointMismatch);
    }
    let p = quotient.modulus();
    let g = Arc::clone(rho_bar.source());
    let n = quotient.size() - 1;
    let module = GModule::trivial(Arc::clone(&g), p, 1);
    let mut entries = std::collections::BTreeMap::new();
    for &(i, j) in quotient.pairs() {
        let mut c = Cochain::zero(Arc::clone(&module), 1, budget)?;
        for x in 0..g.order() as u32 {
            c.set_scalar(&[x], p.neg(quotient.entry(rho_bar.apply(x), i, j)?));
        }
        entries.insert((i, j), c);
    }
    Ok(DefiningSystem::new(n, module, entries)?)
}

/// Search a lift of `ρ̄` through the central extension
/// `U_{size} → Ū_{size}`, backtracking over the `p` central fiber
/// choices per generator in lexicographic order.
pub fn lift_through_center(
    rho_bar: &GroupHom,
    total: &UnitriangularGroup,
    quotient: &UnitriangularGroup,
    budget: &Budget,
) -> Result<Option<GroupHom>, EmbedError> {
    if rho_bar.target().fingerprint() != quotient.group().fingerprint() {
        return Err(EmbedError::EndpointMismatch);
    }
    let projection = corner_projection(total, quotient)?;
    let mut fibers: Vec<Vec<u32>> = vec![Vec::new(); quotient.order()];
    for u in 0..total.order() as u32 {
        fibers[projection.apply(u) as usize].push(u);
    }
    let g = Arc::clone(rho_bar.source());
    let gens = g.generators();
    let lists: Vec<&[u32]> = gens
        .iter()
        .map(|&x| fibers[rho_bar.apply(x) as usize].as_slice())
        .collect();
    if lists.iter().any(|l| l.is_empty()) {
        return Ok(None);
    }
    let mut counter = StepCounter::new("central lift search", budget.enum_steps);
    let mut picks = vec![0usize; gens.len()];
    loop {
        counter.tick()?;
        let images: Vec<u32> = picks.iter().zip(lists.iter()).map(|(&c, l)| l[c]).collect();
        if let Ok(hom) = GroupHom::from_generator_images(
            Arc::clone(&g),
            Arc::clone(total.group()),
            gens,
            &images,
        ) {
            let covers = (0..g.order() as u32)
                .all(|x| projection.apply(hom.apply(x)) == rho_bar.apply(x));
            if covers {
                return Ok(Some(hom));
            }
        }
        let mut done = true;
        for (c, l) in picks.iter_mut().zip(lists.iter()) {
            *c += 1;
            if *c < l.len() {
                done = false;
                break;
            }
            *c = 0;
        }
        if done {
            return Ok(None);
        }
    }
}

/// A surjection `G → U_4(F_p)` whose three superdiagonal entry
/// characters are the given classes, when the cup preconditions hold.
pub fn u4_realization(
    inputs: &[CohomClass],
    budget: &Budget,
) -> Result<GroupHom, EmbedError> {
    if inputs.len() != 3 {
        return Err(MasseyError::ArityMismatch { expected: 3, got: inputs.len() }.into());
    }
    let module = Arc::clone(inputs[0].module());
    let p = module.modulus();
    let g = Arc::clone(module.group());
    let reps: Vec<&Cochain> = inputs.iter().map(CohomClass::representative).collect();

    let mut independent = RowReducer::new(p, g.order());
    for r in &reps {
        if !independent.push(r.table().clone()) {
            return Err(EmbedError::DependentCharacters);
        }
    }
    for (i, j) in [(0usize, 1usize), (1, 2)] {
        let cup = reps[i].cup(reps[j], budget)?;
        if is_coboundary(&cup, budget)?.is_none() {
            return Err(EmbedError::ObstructedCup(i + 1, j + 1));
        }
    }

    let total = UnitriangularGroup::full(4, p.get(), budget)?;
    let quotient = UnitriangularGroup::corner_quotient(4, p.get(), budget)?;
    let gens = g.generators();
    let candidate_lists: Vec<Vec<u32>> = gens
        .iter()
        .map(|&x| {
            let wanted: Vec<u32> = reps.iter().map(|r| r.scalar(&[x])).collect();
            (0..quotient.order() as u32)
                .filter(|&u| quotient.superdiagonal(u) == wanted)
                .collect()
        })
        .collect();
    if candidate_lists.iter().any(|l| l.is_empty()) {
        return Err(EmbedError::NoLift);
    }
    let mut counter = StepCounter::new("realization search", budget.enum_steps);
    let mut picks = vec![0usize; gens.len()];
    loop {
        counter.tick()?;
        let images: Vec<u32> = picks
            .iter()
            .zip(candidate_lists.iter())
            .map(|(&c, l)| l[c])
            .collect();
        if let Ok(rho_bar) = GroupHom::from_generator_images(
            Arc::clone(&g),
            Arc::clone(quotient.group()),
            gens,
            &images,
        ) {
            if let Some(rho) = lift_through_center(&rho_bar, &total, &quotient, budget)? {
                if rho.is_surjective() {
                    return Ok(rho);
                }
            }
        }
        let mut done = true;
        for (c, l) in picks.iter_mut().zip(candidate_lists.iter()) {
            *c += 1;
            if *c < l.len() {
                done = false;
                break;
            }
            *c = 0;
        }
        if done {
            return Err(EmbedError::NoLift);
        }
    }
}

/// Whether the joint restriction `H^2(G, M) → Π H^2(G_i, M)` is
/// injective; a nonzero kernel class is returned as the witness when it
/// is not.
pub fn restriction_injective_h2(
    module: &Arc<GModule>,
    subgroups: &[Subgroup],
    budget: &Budget,
) -> Result<(bool, Option<CohomClass>), EmbedError> {
    let kernel = restricted_kernel_classes(module, 2, subgroups, budget)?;
    match kernel.into_iter().next() {
        None => Ok((true, None)),
        Some(witness) => Ok((false, Some(witness))),
    }
}

/// Outcome of the local-global argument for a triple product's lifting
/// problem.
#[derive(Debug, Clone)]
pub struct LocalGlobalReport {
    /// Injectivity of the joint `H^2` restriction for the kernel module.
    pub restriction_injective: bool,
    pub injectivity_witness: Option<CohomClass>,
    /// Solvability of the restricted problem on each subgroup.
    pub local_solvable: Vec<bool>,
    /// What the argument concludes about the global problem, when the
    /// injectivity hypothesis holds.
    pub implied_solvable: Option<bool>,
    /// The direct global lift, computed as a cross-check.
    pub direct_lift: Option<GroupHom>,
    /// Agreement between the implication and the direct search.
    pub consistent: Option<bool>,
}

/// Run the local-global argument: build the quotient homomorphism of a
/// defining system for the triple product, pull the central obstruction
/// back to `G`, and compare restriction-based solvability with the
/// direct lift.
pub fn local_global_vanishing(
    inputs: &[CohomClass],
    subgroups: &[Subgroup],
    budget: &Budget,
) -> Result<LocalGlobalReport, EmbedError> {
    let coset = match triple_massey(inputs, budget)? {
        TripleProduct::Undefined { .. } => return Err(EmbedError::ProductUndefined),
        TripleProduct::Defined(c) => c,
    };
    let _ = contains_zero(&coset, budget)?;
    let rho_bar = ds_to_hom(&coset.system, budget)?;
    let module = Arc::clone(inputs[0].module());
    let p = module.modulus();
    let extension = center_extension(4, p.get(), budget)?;
    let problem = WeakEmbeddingProblem::new(rho_bar.clone(), extension)?;

    let pulled_module = problem.pulled_module(budget)?;
    let pulled = problem.pulled_cochain(budget)?;
    let (restriction_injective, injectivity_witness) =
        restriction_injective_h2(&pulled_module, subgroups, budget)?;
    let mut local_solvable = Vec::with_capacity(subgroups.len());
    for sub in subgroups {
        let restricted = pulled.restrict(sub, budget)?;
        local_solvable.push(is_coboundary(&restricted, budget)?.is_some());
    }
    let implied_solvable = if restriction_injective {
        Some(local_solvable.iter().all(|&s| s))
    } else {
        None
    };
    let total = UnitriangularGroup::full(4, p.get(), budget)?;
    let quotient = UnitriangularGroup::corner_quotient(4, p.get(), budget)?;
    let direct_lift = lift_through_center(&rho_bar, &total, &quotient, budget)?;
    let consistent = implied_solvable.map(|s| s == direct_lift.is_some());
    Ok(LocalGlobalReport {
        restriction_injective,
        injectivity_witness,
        local_solvable,
        implied_solvable,
        direct_lift,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{cocycle_space, h_dim};
    use crate::massey::{enumerate_defining_systems, system_pairs};
    use crate::unipotent::{extension_cocycle, kernel_action};

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
    fn superdiagonal_extension_matches_unipotent_conventions() {
        let b = budget();
        for p in [2u32, 3] {
            let ext = superdiagonal_extension(p, &b).unwrap();
            assert_eq!(ext.kernel().order(), (p * p * p) as usize);
            let pr = ext.modulus();
            // Module action at (x, y, z) equals the conjugation action
            // computed from the section matrix.
            for q in 0..ext.quotient().order() as u32 {
                let (x, y, z) = (q % p, (q / p) % p, (q / (p * p)) % p);
                let expected = kernel_action(pr, x, y, z).unwrap();
                assert_eq!(ext.module().act(q), &expected, "p={p} q={q}");
            }
            // Extension cocycle table matches the section-based one.
            let eps = ext.extension_cochain(&b).unwrap();
            for g in 0..ext.quotient().order() as u32 {
                for h in 0..ext.quotient().order() as u32 {
                    let gd = (g % p, (g / p) % p, (g / (p * p)) % p);
                    let hd = (h % p, (h / p) % p, (h / (p * p)) % p);
                    let expected = extension_cocycle(pr, gd, hd).unwrap();
                    assert_eq!(eps.value(&[g, h]), expected);
                }
            }
        }
    }

    #[test]
    fn superdiagonal_extension_class_is_nonzero() {
        let b = budget();
        let ext = superdiagonal_extension(2, &b).unwrap();
        let eps = ext.extension_class(&b).unwrap();
        assert!(!eps.is_zero_class(&b).unwrap());
    }

    #[test]
    fn center_extension_has_trivial_action_and_central_kernel() {
        let b = budget();
        let ext = center_extension(4, 2, &b).unwrap();
        assert_eq!(ext.kernel().order(), 2);
        assert!(ext.module().is_trivial());
        // Kernel members commute with everything.
        let total = ext.total();
        for &k in ext.kernel().members() {
            for u in 0..total.order() as u32 {
                assert_eq!(total.mul(k, u), total.mul(u, k));
            }
        }
    }

    #[test]
    fn ds_hom_correspondence_round_trips_on_z4() {
        let b = budget();
        let module = trivial_module(4, 2);
        let chi = character(&module, &[1]);
        let inputs = vec![chi.clone(), chi.clone(), chi.clone()];
        let systems = enumerate_defining_systems(&inputs, &b).unwrap();
        assert!(!systems.is_empty());
        let quotient = UnitriangularGroup::corner_quotient(4, 2, &b).unwrap();
        for ds in &systems {
            let hom = ds_to_hom(ds, &b).unwrap();
            let back = hom_to_ds(&hom, &quotient, &b).unwrap();
            assert_eq!(&back, ds);
            // The produced system re-validates.
            assert_eq!(back.validate(&inputs, &b).unwrap(), None);
        }
    }

    #[test]
    fn hom_ds_correspondence_round_trips_on_klein_four_homs() {
        let b = budget();
        let g = Arc::new(FiniteGroup::elementary_abelian(2, 2).unwrap());
        let quotient = UnitriangularGroup::corner_quotient(4, 2, &b).unwrap();
        let q = Arc::clone(quotient.group());
        // Enumerate every hom V4 → Ū4(F2) by generator images.
        let gens = g.generators();
        assert_eq!(gens.len(), 2);
        let mut count = 0usize;
        for i1 in 0..q.order() as u32 {
            for i2 in 0..q.order() as u32 {
                let Ok(hom) = GroupHom::from_generator_images(
                    Arc::clone(&g),
                    Arc::clone(&q),
                    gens,
                    &[i1, i2],
                ) else {
                    continue;
                };
                count += 1;
                let ds = hom_to_ds(&hom, &quotient, &b).unwrap();
                let back = ds_to_hom(&ds, &b).unwrap();
                assert_eq!(back.images(), hom.images());
                // Condition (2) holds on the read-off system.
                assert_eq!(ds.coboundary_equations_violation(&b).unwrap(), None);
            }
        }
        assert!(count > 1);
    }

    #[test]
    fn zero_system_maps_to_trivial_hom() {
        let b = budget();
        let module = trivial_module(4, 2);
        let ds = DefiningSystem::zero(3, Arc::clone(&module), &b).unwrap();
        let hom = ds_to_hom(&ds, &b).unwrap();
        let target_id = hom.target().identity();
        assert!(hom.images().iter().all(|&im| im == target_id));
    }

    #[test]
    fn lift_matches_value_vanishing_on_z4() {
        let b = budget();
        let module = trivial_module(4, 2);
        let chi = character(&module, &[1]);
        let inputs = vec![chi.clone(), chi.clone(), chi.clone()];
        let total = UnitriangularGroup::full(4, 2, &b).unwrap();
        let quotient = UnitriangularGroup::corner_quotient(4, 2, &b).unwrap();
        for ds in enumerate_defining_systems(&inputs, &b).unwrap() {
            let value_zero = ds.value(&b).unwrap().is_zero_class(&b).unwrap();
            let rho_bar = ds_to_hom(&ds, &b).unwrap();
            let lift = lift_through_center(&rho_bar, &total, &quotient, &b).unwrap();
            assert_eq!(value_zero, lift.is_some());
            if let Some(rho) = lift {
                let proj = corner_projection(&total, &quotient).unwrap();
                for x in 0..4u32 {
                    assert_eq!(proj.apply(rho.apply(x)), rho_bar.apply(x));
                }
            }
        }
    }

    #[test]
    fn hoechsmann_agrees_with_direct_search_for_trivial_alpha() {
        let b = budget();
        let ext = superdiagonal_extension(2, &b).unwrap();
        let g = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let alpha = GroupHom::from_images(
            Arc::clone(&g),
            Arc::clone(ext.quotient()),
            vec![ext.quotient().identity(); 4],
        )
        .unwrap();
        let problem = WeakEmbeddingProblem::new(alpha, ext).unwrap();
        let report = problem.hoechsmann_solvable(&b).unwrap();
        assert!(report.solvable);
        assert!(report.witness.is_some());
        assert!(problem.direct_weak_solution(&b).unwrap().is_some());
    }

    #[test]
    fn identity_problem_detects_nonsplit_extension() {
        let b = budget();
        let ext = superdiagonal_extension(2, &b).unwrap();
        let alpha = GroupHom::identity_on(Arc::clone(ext.quotient()));
        let problem = WeakEmbeddingProblem::new(alpha, ext).unwrap();
        // A solution to the identity problem is a splitting, and the
        // extension class is nonzero, so none can exist.
        let report = problem.hoechsmann_solvable(&b).unwrap();
        assert!(!report.solvable);
        assert!(report.witness.is_none());
        assert!(!report.obstruction.pulled_back.is_zero_class(&b).unwrap());
        assert!(problem.direct_weak_solution(&b).unwrap().is_none());
    }

    #[test]
    fn hoechsmann_witness_projects_to_alpha() {
        let b = budget();
        let ext = superdiagonal_extension(2, &b).unwrap();
        let g = Arc::new(FiniteGroup::cyclic(2).unwrap());
        // alpha sends the generator to the first coordinate vector.
        let alpha = GroupHom::from_generator_images(
            Arc::clone(&g),
            Arc::clone(ext.quotient()),
            g.generators(),
            &[1],
        )
        .unwrap();
        let problem = WeakEmbeddingProblem::new(alpha.clone(), ext).unwrap();
        let report = problem.hoechsmann_solvable(&b).unwrap();
        let direct = problem.direct_weak_solution(&b).unwrap();
        assert_eq!(report.solvable, direct.is_some());
        if let Some(beta) = report.witness {
            let proj = problem.extension().projection();
            for x in 0..2u32 {
                assert_eq!(proj.apply(beta.apply(x)), alpha.apply(x));
            }
        }
    }

    #[test]
    fn u4_realization_identity_case() {
        let b = budget();
        let total = UnitriangularGroup::full(4, 2, &b).unwrap();
        let g = Arc::clone(total.group());
        let module = GModule::trivial(Arc::clone(&g), Prime::new(2).unwrap(), 1);
        // Superdiagonal projection characters.
        let mut classes = Vec::new();
        for slot in 0..3usize {
            let mut c = Cochain::zero(Arc::clone(&module), 1, &b).unwrap();
            for u in 0..total.order() as u32 {
                c.set_scalar(&[u], total.superdiagonal(u)[slot]);
            }
            classes.push(CohomClass::new(c, &b).unwrap());
        }
        let rho = u4_realization(&classes, &b).unwrap();
        assert!(rho.is_surjective());
        for u in 0..total.order() as u32 {
            let image_sd = total.superdiagonal(rho.apply(u));
            let wanted: Vec<u32> =
                classes.iter().map(|c| c.representative().scalar(&[u])).collect();
            assert_eq!(image_sd, wanted);
        }
    }

    #[test]
    fn u4_realization_rejects_obstructed_cups() {
        let b = budget();
        let g = Arc::new(FiniteGroup::elementary_abelian(2, 3).unwrap());
        let module = GModule::trivial(g, Prime::new(2).unwrap(), 1);
        let chi1 = character(&module, &[1, 0, 0]);
        let chi2 = character(&module, &[0, 1, 0]);
        let chi3 = character(&module, &[0, 0, 1]);
        match u4_realization(&[chi1, chi2, chi3], &b) {
            Err(EmbedError::ObstructedCup(1, 2)) => {}
            other => panic!("expected cup obstruction, got {other:?}"),
        }
    }

    #[test]
    fn u4_realization_rejects_dependent_characters() {
        let b = budget();
        let module = trivial_module(8, 2);
        let chi = character(&module, &[1]);
        match u4_realization(&[chi.clone(), chi.clone(), chi], &b) {
            Err(EmbedError::DependentCharacters) => {}
            other => panic!("expected dependence rejection, got {other:?}"),
        }
    }

    #[test]
    fn restriction_injectivity_examples() {
        let b = budget();
        let g = Arc::new(FiniteGroup::elementary_abelian(2, 2).unwrap());
        let module = GModule::trivial(Arc::clone(&g), Prime::new(2).unwrap(), 1);
        // Restriction to the whole group is injective.
        let whole = g.subgroup(&(0..4u32).collect::<Vec<_>>()).unwrap();
        let (inj, _) = restriction_injective_h2(&module, &[whole], &b).unwrap();
        assert!(inj);
        // Restriction to the trivial subgroup alone is not (H^2 ≠ 0).
        assert!(h_dim(&module, 2, &b).unwrap() > 0);
        let trivial_sub = g.subgroup(&[0]).unwrap();
        let (inj, witness) = restriction_injective_h2(&module, &[trivial_sub], &b).unwrap();
        assert!(!inj);
        let w = witness.unwrap();
        assert!(!w.is_zero_class(&b).unwrap());
        // The three order-2 lines: verdict comes from the direct kernel
        // computation, which this call is — cross-check the kernel count
        // against a hand enumeration over all 2-cocycle classes.
        let lines: Vec<Subgroup> = g
            .cyclic_subgroups()
            .into_iter()
            .filter(|s| s.order() == 2)
            .collect();
        assert_eq!(lines.len(), 3);
        let (inj_lines, _) = restriction_injective_h2(&module, &lines, &b).unwrap();
        let z2 = cocycle_space(&module, 2, &b).unwrap();
        let mut kernel_count = 0usize;
        let mut coeffs = vec![0u32; z2.len()];
        loop {
            let mut z = Cochain::zero(Arc::clone(&module), 2, &b).unwrap();
            for (c, basis) in coeffs.iter().zip(z2.iter()) {
                if *c != 0 {
                    z.add_assign(basis).unwrap();
                }
            }
            let dies_everywhere = lines.iter().all(|s| {
                let r = z.restrict(s, &b).unwrap();
                is_coboundary(&r, &b).unwrap().is_some()
            });
            if dies_everywhere && is_coboundary(&z, &b).unwrap().is_none() {
                kernel_count += 1;
            }
            if !advance(&mut coeffs, 2) {
                break;
            }
        }
        assert_eq!(inj_lines, kernel_count == 0);
    }

    #[test]
    fn local_global_on_whole_group_reduces_to_direct() {
        let b = budget();
        let module = trivial_module(4, 2);
        let chi = character(&module, &[1]);
        let inputs = vec![chi.clone(), chi.clone(), chi.clone()];
        let g = Arc::clone(module.group());
        let whole = g.subgroup(&(0..4u32).collect::<Vec<_>>()).unwrap();
        let report = local_global_vanishing(&inputs, &[whole], &b).unwrap();
        assert!(report.restriction_injective);
        assert_eq!(report.consistent, Some(true));
        assert_eq!(report.implied_solvable, Some(report.direct_lift.is_some()));
    }

    #[test]
    fn system_pairs_shape() {
        assert_eq!(system_pairs(3), vec![(1, 2), (2, 3), (3, 4), (1, 3), (2, 4)]);
        assert_eq!(
            system_pairs(4),
            vec![(1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (2, 4), (3, 5), (1, 4), (2, 5)]
        );
    }
}
