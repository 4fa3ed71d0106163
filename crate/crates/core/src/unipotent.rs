//! Unitriangular matrix groups over `F_p` and the superdiagonal
//! extension data attached to size 4.
//!
//! [`UnitriangularGroup`] materializes the group of upper unitriangular
//! `size × size` matrices — or its quotient by the corner subgroup
//! (the `(1, size)` entry), which is the center — as a validated
//! [`FiniteGroup`] whose elements are indexed by their strict upper
//! entries in row-major mixed-radix order.
//!
//! For size 4 the superdiagonal map onto `F_p^3` has an elementary
//! abelian kernel with basis `(I+E24, I+E13, I+E14)`. The conjugation
//! action of the quotient on that kernel ([`kernel_action`]) and its
//! inverse-transpose dual ([`dual_kernel_action`]) are computed from
//! first principles by conjugating through the superdiagonal section;
//! closed forms appear only in tests. [`extension_cocycle`] evaluates
//! the factor set `s(g) s(h) s(gh)^{-1}` of the extension in kernel
//! coordinates.

use std::sync::Arc;

use thiserror::Error;

use crate::groups::{from_matrix_generators, FiniteGroup, GroupError, GroupHom, MatrixGroup};
use crate::limits::{Budget, BudgetExceeded};
use crate::linalg::{invert, inv_transpose, LinalgError, MatP, Prime, VecP};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum UnipotentError {
    #[error("matrix size must be at least 2, got {0}")]
    SizeTooSmall(usize),
    #[error("coordinate ({i}, {j}) is not a strict upper position of a size-{size} element")]
    CoordinateOutOfRange { i: usize, j: usize, size: usize },
    #[error("coordinate ({i}, {j}) is absent from corner-quotient elements")]
    CoordinateAbsent { i: usize, j: usize },
    #[error("matrix is not unitriangular at ({i}, {j})")]
    NotUnitriangular { i: usize, j: usize },
    #[error("matrix lies outside the kernel: superdiagonal entry ({i}, {j}) is nonzero")]
    NotInKernel { i: usize, j: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// Strict upper positions of a `size × size` matrix, 1-based, row-major,
/// optionally omitting the `(1, size)` corner.
fn strict_upper_pairs(size: usize, omit_corner: bool) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(size * (size - 1) / 2);
    for i in 1..=size {
        for j in (i + 1)..=size {
            if omit_corner && i == 1 && j == size {
                continue;
            }
            pairs.push((i, j));
        }
    }
    pairs
}

/// The group of upper unitriangular matrices over `F_p`, or its quotient
/// by the corner subgroup, with elements indexed by strict upper entries.
#[derive(Debug, Clone)]
pub struct UnitriangularGroup {
    group: Arc<FiniteGroup>,
    size: usize,
    p: Prime,
    pairs: Vec<(usize, usize)>,
    corner_omitted: bool,
}

impl UnitriangularGroup {
    /// The full unitriangular group of `size × size` matrices over `F_p`,
    /// of order `p^(size(size-1)/2)`.
    pub fn full(size: usize, p: u32, budget: &Budget) -> Result<Self, UnipotentError> {
        Self::build(size, p, false, budget)
    }

    /// The quotient by the corner subgroup `{I + c·E_(1,size)}` (the
    /// center), of order `p^(size(size-1)/2 - 1)`. Elements are coset
    /// representatives with the corner entry omitted.
    pub fn corner_quotient(size: usize, p: u32, budget: &Budget) -> Result<Self, UnipotentError> {
        Self::build(size, p, true, budget)
    }

    fn build(size: usize, p: u32, omit: bool, budget: &Budget) -> Result<Self, UnipotentError> {
        if size < 2 {
            return Err(UnipotentError::SizeTooSmall(size));
        }
        let p = Prime::new(p)?;
        let pairs = strict_upper_pairs(size, omit);
        let order = (p.get() as u64)
            .checked_pow(pairs.len() as u32)
            .ok_or(BudgetExceeded {
                what: "unitriangular group order",
                required: u64::MAX,
                limit: budget.matrix_cells,
            })?;
        budget.check_matrix("unitriangular multiplication table", order.saturating_mul(order))?;
        let order = order as usize;
        let ctx = UnitriangularGroup {
            group: Arc::new(FiniteGroup::trivial()),
            size,
            p,
            pairs,
            corner_omitted: omit,
        };
        let mats: Vec<MatP> = (0..order as u32).map(|e| ctx.to_matrix(e)).collect();
        let mut mul = vec![0u32; order * order];
        for a in 0..order {
            for b in 0..order {
                let prod = mats[a].mul(&mats[b])?;
                mul[a * order + b] = ctx.index_of_matrix_unchecked(&prod);
            }
        }
        let labels = (0..order as u32).map(|e| ctx.element_label(e)).collect();
        let table: Vec<Vec<u32>> = (0..order)
            .map(|a| mul[a * order..(a + 1) * order].to_vec())
            .collect();
        let group = Arc::new(FiniteGroup::from_mul_table_labeled(table, labels)?);
        Ok(UnitriangularGroup { group, ..ctx })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    /// The strict upper positions an element carries, in index order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn is_corner_omitted(&self) -> bool {
        self.corner_omitted
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    fn element_label(&self, elem: u32) -> String {
        let digits: Vec<String> =
            self.digits(elem).into_iter().map(|d| d.to_string()).collect();
        let sep = if self.p.get() > 9 { "." } else { "" };
        format!("u{}", digits.join(sep))
    }

    fn digits(&self, elem: u32) -> Vec<u32> {
        let q = self.p.get();
        let mut rest = elem;
        self.pairs
            .iter()
            .map(|_| {
                let d = rest % q;
                rest /= q;
                d
            })
            .collect()
    }

    /// The entry at 1-based position `(i, j)`, `i < j`.
    pub fn entry(&self, elem: u32, i: usize, j: usize) -> Result<u32, UnipotentError> {
        if !(1 <= i && i < j && j <= self.size) {
            return Err(UnipotentError::CoordinateOutOfRange { i, j, size: self.size });
        }
        match self.pairs.iter().position(|&pr| pr == (i, j)) {
            Some(k) => {
                let q = self.p.get();
                Ok(self.digits(elem)[k] % q)
            }
            None => Err(UnipotentError::CoordinateAbsent { i, j }),
        }
    }

    /// The element with the given entries (unspecified positions zero).
    pub fn element_with_entries(
        &self,
        entries: &[(usize, usize, u32)],
    ) -> Result<u32, UnipotentError> {
        let q = self.p.get();
        let mut digits = vec![0u32; self.pairs.len()];
        for &(i, j, v) in entries {
            if !(1 <= i && i < j && j <= self.size) {
                return Err(UnipotentError::CoordinateOutOfRange { i, j, size: self.size });
            }
            let k = self
                .pairs
                .iter()
                .position(|&pr| pr == (i, j))
                .ok_or(UnipotentError::CoordinateAbsent { i, j })?;
            digits[k] = v % q;
        }
        Ok(self.index_of_digits(&digits))
    }

    fn index_of_digits(&self, digits: &[u32]) -> u32 {
        let q = self.p.get();
        digits.iter().rev().fold(0u32, |acc, &d| acc * q + d)
    }

    /// The matrix of an element; for corner-quotient elements the coset
    /// representative with corner entry zero.
    pub fn to_matrix(&self, elem: u32) -> MatP {
        let digits = self.digits(elem);
        let mut m = MatP::identity(self.p, self.size);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            m.set(i - 1, j - 1, digits[k]);
        }
        m
    }

    fn index_of_matrix_unchecked(&self, m: &MatP) -> u32 {
        let digits: Vec<u32> =
            self.pairs.iter().map(|&(i, j)| m.get(i - 1, j - 1)).collect();
        self.index_of_digits(&digits)
    }

    /// The element of a unitriangular matrix; for corner quotients the
    /// corner entry is ignored.
    pub fn element_of_matrix(&self, m: &MatP) -> Result<u32, UnipotentError> {
        if m.rows() != self.size || m.cols() != self.size {
            return Err(LinalgError::DimensionMismatch {
                context: "unitriangular element",
                expected: self.size,
                got: m.rows().max(m.cols()),
            }
            .into());
        }
        if m.modulus() != self.p {
            return Err(LinalgError::ModulusMismatch(self.p.get(), m.modulus().get()).into());
        }
        for i in 0..self.size {
            for j in 0..=i {
                let want = u32::from(i == j);
                if m.get(i, j) != want {
                    return Err(UnipotentError::NotUnitriangular { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(self.index_of_matrix_unchecked(m))
    }

    /// The superdiagonal entries `(u_12, u_23, …)`, length `size - 1`.
    pub fn superdiagonal(&self, elem: u32) -> Vec<u32> {
        (1..self.size)
            .map(|i| self.entry(elem, i, i + 1).expect("superdiagonal positions always present"))
            .collect()
    }

    /// The validated projection onto the elementary abelian group
    /// `F_p^(size-1)` by superdiagonal entries, little-endian digits.
    pub fn superdiagonal_projection(&self) -> Result<GroupHom, UnipotentError> {
        let target = Arc::new(FiniteGroup::elementary_abelian(self.p.get(), self.size - 1)?);
        let q = self.p.get();
        let images: Vec<u32> = (0..self.order() as u32)
            .map(|e| {
                self.superdiagonal(e)
                    .iter()
                    .rev()
                    .fold(0u32, |acc, &d| acc * q + d)
            })
            .collect();
        Ok(GroupHom::from_images(Arc::clone(&self.group), target, images)?)
    }
}

/// The validated projection from the full group to its corner quotient
/// of the same size and modulus; kernel is the corner subgroup.
pub fn corner_projection(
    total: &UnitriangularGroup,
    quotient: &UnitriangularGroup,
) -> Result<GroupHom, UnipotentError> {
    if total.corner_omitted || !quotient.corner_omitted {
        return Err(UnipotentError::Group(GroupError::InvalidParameter(
            "corner projection maps a full group onto a corner quotient".into(),
        )));
    }
    if total.size != quotient.size {
        return Err(LinalgError::DimensionMismatch {
            context: "corner projection",
            expected: total.size,
            got: quotient.size,
        }
        .into());
    }
    if total.p != quotient.p {
        return Err(LinalgError::ModulusMismatch(total.p.get(), quotient.p.get()).into());
    }
    let images: Vec<u32> = (0..total.order() as u32)
        .map(|e| quotient.element_of_matrix(&total.to_matrix(e)).expect("representatives are unitriangular"))
        .collect();
    Ok(GroupHom::from_images(
        Arc::clone(total.group()),
        Arc::clone(quotient.group()),
        images,
    )?)
}

/// The superdiagonal-only section `F_p^3 -> U_4(F_p)` as a matrix:
/// identity plus `x·E12 + y·E23 + z·E34`.
pub fn section_matrix(p: Prime, x: u32, y: u32, z: u32) -> MatP {
    let mut m = MatP::identity(p, 4);
    m.set(0, 1, p.reduce(x.into()));
    m.set(1, 2, p.reduce(y.into()));
    m.set(2, 3, p.reduce(z.into()));
    m
}

/// The kernel basis `(I+E24, I+E13, I+E14)` of the superdiagonal map on
/// size-4 matrices, in that order.
pub fn kernel_basis_matrices(p: Prime) -> [MatP; 3] {
    let mut e1 = MatP::identity(p, 4);
    e1.set(1, 3, 1);
    let mut e2 = MatP::identity(p, 4);
    e2.set(0, 2, 1);
    let mut e3 = MatP::identity(p, 4);
    e3.set(0, 3, 1);
    [e1, e2, e3]
}

/// Coordinates of a kernel element `I + a·E24 + b·E13 + c·E14` in the
/// basis order `(a, b, c)`; rejects matrices outside the kernel.
pub fn kernel_coords(m: &MatP) -> Result<VecP, UnipotentError> {
    let p = m.modulus();
    if m.rows() != 4 || m.cols() != 4 {
        return Err(LinalgError::DimensionMismatch {
            context: "kernel element",
            expected: 4,
            got: m.rows().max(m.cols()),
        }
        .into());
    }
    for i in 0..4 {
        for j in 0..=i {
            if m.get(i, j) != u32::from(i == j) {
                return Err(UnipotentError::NotUnitriangular { i: i + 1, j: j + 1 });
            }
        }
    }
    for (i, j) in [(1usize, 2usize), (2, 3), (3, 4)] {
        if m.get(i - 1, j - 1) != 0 {
            return Err(UnipotentError::NotInKernel { i, j });
        }
    }
    Ok(VecP::from_u32s(p, &[m.get(1, 3), m.get(0, 2), m.get(0, 3)]))
}

/// The kernel element with the given coordinates.
pub fn kernel_element(p: Prime, coords: &VecP) -> MatP {
    let mut m = MatP::identity(p, 4);
    m.set(1, 3, coords.get(0));
    m.set(0, 2, coords.get(1));
    m.set(0, 3, coords.get(2));
    m
}

/// The conjugation action of `(x, y, z)` in the superdiagonal quotient
/// on the kernel, as a 3×3 matrix in the basis `(I+E24, I+E13, I+E14)`.
/// Computed by conjugating each basis element through the section.
pub fn kernel_action(p: Prime, x: u32, y: u32, z: u32) -> Result<MatP, UnipotentError> {
    let s = section_matrix(p, x, y, z);
    let s_inv = invert(&s)?;
    let mut out = MatP::zeros(p, 3, 3);
    for (col, e) in kernel_basis_matrices(p).iter().enumerate() {
        let conj = s.mul(e)?.mul(&s_inv)?;
        let coords = kernel_coords(&conj)?;
        for row in 0..3 {
            out.set(row, col, coords.get(row));
        }
    }
    Ok(out)
}

/// The inverse-transpose of [`kernel_action`] — the action on the dual
/// of the kernel.
pub fn dual_kernel_action(p: Prime, x: u32, y: u32, z: u32) -> Result<MatP, UnipotentError> {
    Ok(inv_transpose(&kernel_action(p, x, y, z)?)?)
}

/// The image of [`dual_kernel_action`] as a matrix group: the closure of
/// `{I+E13, I+E23}` inside `GL_3(F_p)`, of order `p^2`.
pub fn dual_action_image(p: u32) -> Result<MatrixGroup, UnipotentError> {
    let pr = Prime::new(p)?;
    let mut g1 = MatP::identity(pr, 3);
    g1.set(0, 2, 1);
    let mut g2 = MatP::identity(pr, 3);
    g2.set(1, 2, 1);
    Ok(from_matrix_generators(p, 3, &[g1, g2], (p * p) as usize + 1)?)
}

/// The factor set `s(g) s(h) s(gh)^{-1}` of the superdiagonal extension,
/// in kernel coordinates; `g`, `h` are superdiagonal triples.
pub fn extension_cocycle(
    p: Prime,
    g: (u32, u32, u32),
    h: (u32, u32, u32),
) -> Result<VecP, UnipotentError> {
    let sg = section_matrix(p, g.0, g.1, g.2);
    let sh = section_matrix(p, h.0, h.1, h.2);
    let sum = section_matrix(
        p,
        p.add(g.0, h.0),
        p.add(g.1, h.1),
        p.add(g.2, h.2),
    );
    let prod = sg.mul(&sh)?.mul(&invert(&sum)?)?;
    kernel_coords(&prod)
}
