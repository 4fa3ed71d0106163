//! Exact dense linear algebra over the prime field `F_p`.
//!
//! Vectors and matrices are dense. Entries for `p = 2` are bit-packed
//! into 64-bit words so row operations are word-wide XORs; odd primes use
//! one byte per entry (which bounds the supported modulus by 251). The
//! public contract never exposes the packing.
//!
//! Row reduction always produces the canonical reduced row-echelon form,
//! so ranks, pivot columns, kernels, and solution sets are reproducible
//! bit for bit regardless of how rows were fed in.

use std::fmt;

use thiserror::Error;

/// Largest supported modulus; odd primes are stored one byte per entry.
pub const MAX_PRIME: u32 = 251;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("prime {0} exceeds the supported maximum {MAX_PRIME}")]
    PrimeTooLarge(u32),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch { context: &'static str, expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
}

/// A validated prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u32) -> Result<Prime, LinalgError> {
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(LinalgError::NotPrime(p));
        }
        if p > MAX_PRIME {
            return Err(LinalgError::PrimeTooLarge(p));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_two(self) -> bool {
        self.0 == 2
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u32 {
        (v % self.0 as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 { s - self.0 } else { s }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b { a - b } else { a + self.0 - b }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 { 0 } else { self.0 - a }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        (a as u64 * b as u64 % self.0 as u64) as u32
    }

    /// Multiplicative inverse of a nonzero residue, by Fermat exponentiation.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(!a.is_multiple_of(self.0), "inverse of zero");
        let mut base = a % self.0;
        let mut exp = self.0 - 2;
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

/// An element of `F_p` that carries its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scalar {
    value: u32,
    modulus: Prime,
}

impl Scalar {
    pub fn new(value: u32, modulus: Prime) -> Scalar {
        Scalar { value: value % modulus.get(), modulus }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn inv(self) -> Result<Scalar, LinalgError> {
        if self.value == 0 {
            return Err(LinalgError::Singular);
        }
        Ok(Scalar { value: self.modulus.inv(self.value), ..self })
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;

    fn add(self, other: Scalar) -> Scalar {
        Scalar { value: self.modulus.add(self.value, other.value), ..self }
    }
}

impl std::ops::Sub for Scalar {
    type Output = Scalar;

    fn sub(self, other: Scalar) -> Scalar {
        Scalar { value: self.modulus.sub(self.value, other.value), ..self }
    }
}

impl std::ops::Mul for Scalar {
    type Output = Scalar;

    fn mul(self, other: Scalar) -> Scalar {
        Scalar { value: self.modulus.mul(self.value, other.value), ..self }
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        Scalar { value: self.modulus.neg(self.value), ..self }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus.get())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Store {
    Bits(Vec<u64>),
    Bytes(Vec<u8>),
}

/// Dense vector over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VecP {
    p: Prime,
    len: usize,
    store: Store,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl VecP {
    pub fn zeros(p: Prime, len: usize) -> VecP {
        let store = if p.is_two() {
            Store::Bits(vec![0u64; words_for(len)])
        } else {
            Store::Bytes(vec![0u8; len])
        };
        VecP { p, len, store }
    }

    pub fn from_u32s(p: Prime, values: &[u32]) -> VecP {
        let mut v = VecP::zeros(p, values.len());
        for (i, &x) in values.iter().enumerate() {
            v.set(i, x % p.get());
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        debug_assert!(i < self.len);
        match &self.store {
            Store::Bits(w) => ((w[i / 64] >> (i % 64)) & 1) as u32,
            Store::Bytes(b) => b[i] as u32,
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: u32) {
        debug_assert!(i < self.len);
        debug_assert!(v < self.p.get());
        match &mut self.store {
            Store::Bits(w) => {
                let mask = 1u64 << (i % 64);
                if v & 1 == 1 {
                    w[i / 64] |= mask;
                } else {
                    w[i / 64] &= !mask;
                }
            }
            Store::Bytes(b) => b[i] = v as u8,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.store {
            Store::Bits(w) => w.iter().all(|&x| x == 0),
            Store::Bytes(b) => b.iter().all(|&x| x == 0),
        }
    }

    pub fn to_u32_vec(&self) -> Vec<u32> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Index and value of the first nonzero entry.
    pub fn leading(&self) -> Option<(usize, u32)> {
        match &self.store {
            Store::Bits(w) => {
                for (wi, &word) in w.iter().enumerate() {
                    if word != 0 {
                        let i = wi * 64 + word.trailing_zeros() as usize;
                        return Some((i, 1));
                    }
                }
                None
            }
            Store::Bytes(b) => b.iter().position(|&x| x != 0).map(|i| (i, b[i] as u32)),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled_assign(&mut self, other: &VecP, c: u32) {
        debug_assert_eq!(self.len, other.len);
        debug_assert_eq!(self.p, other.p);
        if c == 0 {
            return;
        }
        match (&mut self.store, &other.store) {
            (Store::Bits(a), Store::Bits(b)) => {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x ^= *y;
                }
            }
            (Store::Bytes(a), Store::Bytes(b)) => {
                let p = self.p;
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x = p.add(*x as u32, p.mul(c, *y as u32)) as u8;
                }
            }
            _ => unreachable!("matching moduli imply matching stores"),
        }
    }

    pub fn sub_assign_vec(&mut self, other: &VecP) {
        let c = self.p.neg(1);
        self.add_scaled_assign(other, c);
    }

    pub fn scale_assign(&mut self, c: u32) {
        match &mut self.store {
            Store::Bits(w) => {
                if c.is_multiple_of(2) {
                    w.iter_mut().for_each(|x| *x = 0);
                }
            }
            Store::Bytes(b) => {
                let p = self.p;
                for x in b.iter_mut() {
                    *x = p.mul(*x as u32, c) as u8;
                }
            }
        }
    }

    pub fn dot(&self, other: &VecP) -> u32 {
        debug_assert_eq!(self.len, other.len);
        match (&self.store, &other.store) {
            (Store::Bits(a), Store::Bits(b)) => {
                let mut acc = 0u32;
                for (x, y) in a.iter().zip(b.iter()) {
                    acc ^= ((x & y).count_ones()) & 1;
                }
                acc & 1
            }
            (Store::Bytes(a), Store::Bytes(b)) => {
                let p = self.p;
                let mut acc = 0u64;
                for (x, y) in a.iter().zip(b.iter()) {
                    acc += *x as u64 * *y as u64;
                    if acc >= 1 << 48 {
                        acc %= p.get() as u64;
                    }
                }
                p.reduce(acc)
            }
            _ => unreachable!(),
        }
    }
}

/// Dense matrix over `F_p`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatP {
    p: Prime,
    rows: usize,
    cols: usize,
    data: Vec<VecP>,
}

impl MatP {
    pub fn zeros(p: Prime, rows: usize, cols: usize) -> MatP {
        MatP { p, rows, cols, data: vec![VecP::zeros(p, cols); rows] }
    }

    pub fn identity(p: Prime, n: usize) -> MatP {
        let mut m = MatP::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: Prime, rows: Vec<VecP>) -> Result<MatP, LinalgError> {
        let cols = rows.first().map_or(0, VecP::len);
        for r in &rows {
            if r.modulus() != p {
                return Err(LinalgError::ModulusMismatch(p.get(), r.modulus().get()));
            }
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    context: "from_rows",
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Ok(MatP { p, rows: rows.len(), cols, data: rows })
    }

    pub fn from_fn(p: Prime, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> MatP {
        let mut m = MatP::zeros(p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j) % p.get();
                if v != 0 {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn from_nested(p: Prime, entries: &[Vec<u32>]) -> Result<MatP, LinalgError> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        for r in entries {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    context: "from_nested",
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Ok(MatP::from_fn(p, rows, cols, |i, j| entries[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i].set(j, v);
    }

    pub fn row(&self, i: usize) -> &VecP {
        &self.data[i]
    }

    pub fn push_row(&mut self, row: VecP) {
        debug_assert_eq!(row.len(), self.cols);
        debug_assert_eq!(row.modulus(), self.p);
        self.data.push(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> MatP {
        MatP::from_fn(self.p, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, other: &MatP) -> Result<MatP, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                got: other.rows,
            });
        }
        let p = self.p;
        let mut out = MatP::zeros(p, self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i];
            for k in 0..self.cols {
                let c = self.get(i, k);
                if c != 0 {
                    dst.add_scaled_assign(&other.data[k], c);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &VecP) -> Result<VecP, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = VecP::zeros(self.p, self.rows);
        for i in 0..self.rows {
            out.set(i, self.data[i].dot(v));
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u32::from(i == j)))
    }

    pub fn to_nested(&self) -> Vec<Vec<u32>> {
        self.data.iter().map(VecP::to_u32_vec).collect()
    }
}

/// Canonical reduced row-echelon form together with its pivot data.
#[derive(Debug, Clone)]
pub struct Rref {
    pub reduced: MatP,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

/// Incremental row reducer maintaining a fully reduced row basis.
///
/// Feeding the rows of a matrix in any order yields the same reduced rows,
/// pivot columns, and kernel, because the reduced row-echelon form of the
/// row space is unique.
#[derive(Debug, Clone)]
pub struct RowReducer {
    p: Prime,
    width: usize,
    rows: Vec<VecP>,
    pivots: Vec<usize>,
}

impl RowReducer {
    pub fn new(p: Prime, width: usize) -> RowReducer {
        RowReducer { p, width, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[VecP] {
        &self.rows
    }

    /// Reduce `v` against the current basis in place.
    pub fn reduce(&self, v: &mut VecP) {
        for (r, &pc) in self.rows.iter().zip(self.pivots.iter()) {
            let c = v.get(pc);
            if c != 0 {
                v.add_scaled_assign(r, self.p.neg(c));
            }
        }
    }

    /// Insert a row; returns `true` when the rank grew.
    pub fn push(&mut self, mut v: VecP) -> bool {
        debug_assert_eq!(v.len(), self.width);
        self.reduce(&mut v);
        let Some((pc, lead)) = v.leading() else { return false };
        if lead != 1 {
            v.scale_assign(self.p.inv(lead));
        }
        for row in self.rows.iter_mut() {
            let c = row.get(pc);
            if c != 0 {
                row.add_scaled_assign(&v, self.p.neg(c));
            }
        }
        let at = self.pivots.partition_point(|&q| q < pc);
        self.pivots.insert(at, pc);
        self.rows.insert(at, v);
        true
    }

    /// Membership of `v` in the row space.
    pub fn contains(&self, v: &VecP) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Kernel basis of the matrix whose row space this reducer holds,
    /// i.e. all `x` with `R x = 0`, one basis vector per free column.
    pub fn kernel_basis(&self) -> Vec<VecP> {
        let mut out = Vec::new();
        let mut next_pivot = 0;
        for j in 0..self.width {
            if next_pivot < self.pivots.len() && self.pivots[next_pivot] == j {
                next_pivot += 1;
                continue;
            }
            let mut v = VecP::zeros(self.p, self.width);
            v.set(j, 1);
            for (r, &pc) in self.rows.iter().zip(self.pivots.iter()) {
                let c = r.get(j);
                if c != 0 {
                    v.set(pc, self.p.neg(c));
                }
            }
            out.push(v);
        }
        out
    }
}

/// Reduced row-echelon form of `m`.
pub fn rref(m: &MatP) -> Rref {
    let mut red = RowReducer::new(m.modulus(), m.cols());
    for i in 0..m.rows() {
        red.push(m.row(i).clone());
    }
    let rank = red.rank();
    let pivot_cols = red.pivots.clone();
    let mut rows = red.rows;
    while rows.len() < m.rows() {
        rows.push(VecP::zeros(m.modulus(), m.cols()));
    }
    let reduced = MatP { p: m.modulus(), rows: m.rows(), cols: m.cols(), data: rows };
    Rref { reduced, rank, pivot_cols }
}

pub fn rank(m: &MatP) -> usize {
    let mut red = RowReducer::new(m.modulus(), m.cols());
    for i in 0..m.rows() {
        red.push(m.row(i).clone());
    }
    red.rank()
}

/// Basis of `{x : m x = 0}`.
pub fn kernel_basis(m: &MatP) -> Vec<VecP> {
    let mut red = RowReducer::new(m.modulus(), m.cols());
    for i in 0..m.rows() {
        red.push(m.row(i).clone());
    }
    red.kernel_basis()
}

/// The solution set of `A x = b` as a particular solution plus a kernel
/// basis. `particular` is absent exactly when the system is inconsistent;
/// the kernel basis is stored, never an enumeration.
#[derive(Debug, Clone)]
pub struct AffineSolutionSet {
    pub particular: Option<VecP>,
    pub kernel_basis: Vec<VecP>,
}

impl AffineSolutionSet {
    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }

    /// Number of solutions, `None` when it overflows `u64`.
    pub fn count(&self, p: Prime) -> Option<u64> {
        if self.particular.is_none() {
            return Some(0);
        }
        let mut n: u64 = 1;
        for _ in &self.kernel_basis {
            n = n.checked_mul(p.get() as u64)?;
        }
        Some(n)
    }

    /// Lazy enumeration of every solution, refused up front when the coset
    /// has more than `budget` elements.
    pub fn enumerate(&self, budget: u64) -> Result<CosetIter, crate::limits::BudgetExceeded> {
        let base = self
            .particular
            .clone()
            .expect("enumerate called on an inconsistent system");
        let p = base.modulus();
        match self.count(p) {
            Some(n) if n <= budget => {}
            got => {
                return Err(crate::limits::BudgetExceeded {
                    what: "affine solution enumeration",
                    required: got.unwrap_or(u64::MAX),
                    limit: budget,
                })
            }
        }
        Ok(CosetIter {
            base,
            basis: self.kernel_basis.clone(),
            digits: vec![0; self.kernel_basis.len()],
            done: false,
        })
    }

    /// Membership test for the solution coset.
    pub fn contains(&self, v: &VecP) -> bool {
        let Some(part) = &self.particular else { return false };
        let p = part.modulus();
        let mut red = RowReducer::new(p, part.len());
        for k in &self.kernel_basis {
            red.push(k.clone());
        }
        let mut diff = v.clone();
        diff.sub_assign_vec(part);
        red.contains(&diff)
    }
}

/// Iterator over a finite coset `base + span(basis)`, in mixed-radix
/// order over the basis coefficients (first basis vector fastest).
#[derive(Debug, Clone)]
pub struct CosetIter {
    base: VecP,
    basis: Vec<VecP>,
    digits: Vec<u32>,
    done: bool,
}

impl Iterator for CosetIter {
    type Item = VecP;

    fn next(&mut self) -> Option<VecP> {
        if self.done {
            return None;
        }
        let p = self.base.modulus();
        let mut out = self.base.clone();
        for (d, b) in self.digits.iter().zip(self.basis.iter()) {
            if *d != 0 {
                out.add_scaled_assign(b, *d);
            }
        }
        let mut i = 0;
        loop {
            if i == self.digits.len() {
                self.done = true;
                break;
            }
            self.digits[i] += 1;
            if self.digits[i] < p.get() {
                break;
            }
            self.digits[i] = 0;
            i += 1;
        }
        Some(out)
    }
}

/// Solve `A x = b`.
pub fn solve_affine(a: &MatP, b: &VecP) -> Result<AffineSolutionSet, LinalgError> {
    if a.rows() != b.len() {
        return Err(LinalgError::DimensionMismatch {
            context: "solve_affine",
            expected: a.rows(),
            got: b.len(),
        });
    }
    if a.modulus() != b.modulus() {
        return Err(LinalgError::ModulusMismatch(a.modulus().get(), b.modulus().get()));
    }
    let p = a.modulus();
    let n = a.cols();
    let mut red = RowReducer::new(p, n + 1);
    for i in 0..a.rows() {
        let mut row = VecP::zeros(p, n + 1);
        for j in 0..n {
            let v = a.get(i, j);
            if v != 0 {
                row.set(j, v);
            }
        }
        let bv = b.get(i);
        if bv != 0 {
            row.set(n, bv);
        }
        red.push(row);
    }
    solution_from_reduced(&red, n)
}

fn solution_from_reduced(red: &RowReducer, n: usize) -> Result<AffineSolutionSet, LinalgError> {
    let p = red.p;
    if red.pivot_cols().contains(&n) {
        return Ok(AffineSolutionSet { particular: None, kernel_basis: Vec::new() });
    }
    let mut particular = VecP::zeros(p, n);
    for (r, &pc) in red.rows().iter().zip(red.pivot_cols().iter()) {
        particular.set(pc, r.get(n));
    }
    let mut kernel = Vec::new();
    let mut next_pivot = 0;
    for j in 0..n {
        if next_pivot < red.pivot_cols().len() && red.pivot_cols()[next_pivot] == j {
            next_pivot += 1;
            continue;
        }
        let mut v = VecP::zeros(p, n);
        v.set(j, 1);
        for (r, &pc) in red.rows().iter().zip(red.pivot_cols().iter()) {
            let c = r.get(j);
            if c != 0 {
                v.set(pc, p.neg(c));
            }
        }
        kernel.push(v);
    }
    Ok(AffineSolutionSet { particular: Some(particular), kernel_basis: kernel })
}

/// Factorized solver for repeated right-hand sides against a fixed matrix.
///
/// Row-reduces `[A | I]` once; each solve applies the recorded elimination
/// to `b` and reads the particular solution off the pivots.
#[derive(Debug, Clone)]
pub struct PreparedSolver {
    p: Prime,
    rows: usize,
    cols: usize,
    rank: usize,
    pivot_cols: Vec<usize>,
    /// Reduced rows of `[A | I]`; the first `cols` coordinates are the
    /// reduced `A` part, the rest record the elimination.
    reduced: Vec<VecP>,
    kernel: Vec<VecP>,
}

impl PreparedSolver {
    pub fn new(a: &MatP) -> PreparedSolver {
        let p = a.modulus();
        let (rows, cols) = (a.rows(), a.cols());
        let mut red = RowReducer::new(p, cols + rows);
        for i in 0..rows {
            let mut row = VecP::zeros(p, cols + rows);
            for j in 0..cols {
                let v = a.get(i, j);
                if v != 0 {
                    row.set(j, v);
                }
            }
            row.set(cols + i, 1);
            red.push(row);
        }
        // Pivots inside the A block come first and form the rank; rows whose
        // pivot falls in the elimination block witness dependent rows of A.
        let mut pivot_cols = Vec::new();
        let mut reduced = Vec::new();
        let mut dependents = Vec::new();
        for (r, &pc) in red.rows().iter().zip(red.pivot_cols().iter()) {
            if pc < cols {
                pivot_cols.push(pc);
                reduced.push(r.clone());
            } else {
                dependents.push(r.clone());
            }
        }
        let rank = pivot_cols.len();
        let mut a_red = RowReducer::new(p, cols);
        for r in &reduced {
            let mut head = VecP::zeros(p, cols);
            for j in 0..cols {
                let v = r.get(j);
                if v != 0 {
                    head.set(j, v);
                }
            }
            a_red.push(head);
        }
        let kernel = a_red.kernel_basis();
        reduced.extend(dependents);
        PreparedSolver { p, rows, cols, rank, pivot_cols, reduced, kernel }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kernel_basis(&self) -> &[VecP] {
        &self.kernel
    }

    /// Particular solution of `A x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &VecP) -> Option<VecP> {
        debug_assert_eq!(b.len(), self.rows);
        let p = self.p;
        let mut particular = VecP::zeros(p, self.cols);
        for (idx, r) in self.reduced.iter().enumerate() {
            // The transformed right-hand side entry is the elimination block
            // of this reduced row dotted with b.
            let mut t = 0u64;
            for i in 0..self.rows {
                let c = r.get(self.cols + i);
                if c != 0 {
                    t += c as u64 * b.get(i) as u64;
                }
            }
            let t = p.reduce(t);
            if idx < self.rank {
                particular.set(self.pivot_cols[idx], t);
            } else if t != 0 {
                return None;
            }
        }
        Some(particular)
    }
}

/// Test whether `v` lies in `particular + span(kernel_basis)`.
pub fn in_coset(v: &VecP, particular: &VecP, kernel_basis: &[VecP]) -> Result<bool, LinalgError> {
    if v.len() != particular.len() {
        return Err(LinalgError::DimensionMismatch {
            context: "in_coset",
            expected: particular.len(),
            got: v.len(),
        });
    }
    if v.modulus() != particular.modulus() {
        return Err(LinalgError::ModulusMismatch(v.modulus().get(), particular.modulus().get()));
    }
    let p = v.modulus();
    let mut red = RowReducer::new(p, v.len());
    for k in kernel_basis {
        if k.len() != v.len() {
            return Err(LinalgError::DimensionMismatch {
                context: "in_coset basis",
                expected: v.len(),
                got: k.len(),
            });
        }
        red.push(k.clone());
    }
    let mut diff = v.clone();
    diff.sub_assign_vec(particular);
    Ok(red.contains(&diff))
}

/// For linear functionals `phi1, phi2` on `F_p^n` (coordinate rows):
/// the scalar `lambda` with `phi2 = lambda * phi1`, when `ker phi1` is
/// contained in `ker phi2`; `None` otherwise. Kernel containment for
/// functionals forces proportionality, so it suffices to read `lambda`
/// off the first nonzero coordinate and verify everywhere.
pub fn proportionality_witness(phi1: &VecP, phi2: &VecP) -> Result<Option<Scalar>, LinalgError> {
    if phi1.len() != phi2.len() {
        return Err(LinalgError::DimensionMismatch {
            context: "proportionality_witness",
            expected: phi1.len(),
            got: phi2.len(),
        });
    }
    if phi1.modulus() != phi2.modulus() {
        return Err(LinalgError::ModulusMismatch(phi1.modulus().get(), phi2.modulus().get()));
    }
    let p = phi1.modulus();
    let lambda = match phi1.leading() {
        None => {
            return Ok(if phi2.is_zero() { Some(Scalar::new(0, p)) } else { None });
        }
        Some((i, lead)) => p.mul(phi2.get(i), p.inv(lead)),
    };
    for j in 0..phi1.len() {
        if phi2.get(j) != p.mul(lambda, phi1.get(j)) {
            return Ok(None);
        }
    }
    Ok(Some(Scalar::new(lambda, p)))
}

/// Inverse of a square matrix.
pub fn invert(x: &MatP) -> Result<MatP, LinalgError> {
    if x.rows() != x.cols() {
        return Err(LinalgError::DimensionMismatch {
            context: "invert",
            expected: x.rows(),
            got: x.cols(),
        });
    }
    let p = x.modulus();
    let n = x.rows();
    let mut red = RowReducer::new(p, 2 * n);
    for i in 0..n {
        let mut row = VecP::zeros(p, 2 * n);
        for j in 0..n {
            let v = x.get(i, j);
            if v != 0 {
                row.set(j, v);
            }
        }
        row.set(n + i, 1);
        red.push(row);
    }
    if red.rank() < n || red.pivot_cols()[n - 1] >= n {
        return Err(LinalgError::Singular);
    }
    let mut inv = MatP::zeros(p, n, n);
    for (r, &pc) in red.rows().iter().zip(red.pivot_cols().iter()) {
        for j in 0..n {
            let v = r.get(n + j);
            if v != 0 {
                inv.set(pc, j, v);
            }
        }
    }
    Ok(inv)
}

/// `(X^{-1})^T`, the matrix of the dual (contragredient) operator.
pub fn inv_transpose(x: &MatP) -> Result<MatP, LinalgError> {
    Ok(invert(x)?.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: u32) -> Prime {
        Prime::new(v).unwrap()
    }

    /// Straightforward reference elimination on nested vectors, kept
    /// deliberately naive and separate from the packed implementation.
    fn naive_rref(p: u32, m: &[Vec<u32>]) -> (Vec<Vec<u32>>, usize) {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut a: Vec<Vec<u64>> =
            m.iter().map(|r| r.iter().map(|&x| (x % p) as u64).collect()).collect();
        let (mut rank, pu) = (0usize, p as u64);
        for col in 0..cols {
            let Some(piv) = (rank..rows).find(|&r| !a[r][col].is_multiple_of(pu)) else { continue };
            a.swap(rank, piv);
            let inv = (1..pu).find(|&x| (x * a[rank][col]) % pu == 1).unwrap();
            for x in a[rank].iter_mut() {
                *x = (*x * inv) % pu;
            }
            let pivot_row = a[rank].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != rank && !row[col].is_multiple_of(pu) {
                    let c = row[col] % pu;
                    for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                        *x = (*x + (pu - c) * pv) % pu;
                    }
                }
            }
            rank += 1;
        }
        (a.into_iter().map(|r| r.into_iter().map(|x| x as u32).collect()).collect(), rank)
    }

    #[test]
    fn rref_rank_one_example() {
        let m = MatP::from_nested(p(2), &[vec![1, 1], vec![1, 1]]).unwrap();
        let r = rref(&m);
        assert_eq!(r.rank, 1);
        assert_eq!(r.reduced.to_nested(), vec![vec![1, 1], vec![0, 0]]);
        assert_eq!(r.pivot_cols, vec![0]);
    }

    #[test]
    fn solve_affine_example() {
        let a = MatP::from_nested(p(2), &[vec![1, 1]]).unwrap();
        let b = VecP::from_u32s(p(2), &[1]);
        let s = solve_affine(&a, &b).unwrap();
        assert_eq!(s.particular.as_ref().unwrap().to_u32_vec(), vec![1, 0]);
        assert_eq!(s.kernel_basis.len(), 1);
        assert_eq!(s.kernel_basis[0].to_u32_vec(), vec![1, 1]);
        let all: Vec<Vec<u32>> = s.enumerate(16).unwrap().map(|v| v.to_u32_vec()).collect();
        assert!(all.contains(&vec![1, 0]) && all.contains(&vec![0, 1]) && all.len() == 2);
    }

    #[test]
    fn empty_particular_iff_inconsistent() {
        let a = MatP::from_nested(p(3), &[vec![1, 2], vec![2, 4]]).unwrap();
        let b = VecP::from_u32s(p(3), &[1, 1]);
        let s = solve_affine(&a, &b).unwrap();
        assert!(!s.is_consistent());
        let b2 = VecP::from_u32s(p(3), &[1, 2]);
        let s2 = solve_affine(&a, &b2).unwrap();
        assert!(s2.is_consistent());
    }

    #[test]
    fn in_coset_example() {
        let v = VecP::from_u32s(p(3), &[1, 1]);
        let part = VecP::from_u32s(p(3), &[0, 1]);
        let basis = vec![VecP::from_u32s(p(3), &[1, 0])];
        assert!(in_coset(&v, &part, &basis).unwrap());
        let off = VecP::from_u32s(p(3), &[0, 2]);
        assert!(!in_coset(&off, &part, &basis).unwrap());
    }

    #[test]
    fn proportionality_examples() {
        let p5 = p(5);
        let a = VecP::from_u32s(p5, &[1, 2]);
        let b = VecP::from_u32s(p5, &[2, 4]);
        assert_eq!(proportionality_witness(&a, &b).unwrap().unwrap().value(), 2);

        let p3 = p(3);
        let a = VecP::from_u32s(p3, &[1, 0]);
        let b = VecP::from_u32s(p3, &[0, 1]);
        assert!(proportionality_witness(&a, &b).unwrap().is_none());

        let p2 = p(2);
        let a = VecP::from_u32s(p2, &[1, 0]);
        let z = VecP::from_u32s(p2, &[0, 0]);
        assert_eq!(proportionality_witness(&a, &z).unwrap().unwrap().value(), 0);
    }

    #[test]
    fn proportionality_matches_exhaustive_scan() {
        for &q in &[2u32, 3, 5] {
            let pr = p(q);
            for dim in 1..=3usize {
                let total = q.pow(dim as u32);
                for x in 0..total {
                    for y in 0..total {
                        let digs = |mut v: u32| {
                            (0..dim)
                                .map(|_| {
                                    let d = v % q;
                                    v /= q;
                                    d
                                })
                                .collect::<Vec<_>>()
                        };
                        let phi1 = VecP::from_u32s(pr, &digs(x));
                        let phi2 = VecP::from_u32s(pr, &digs(y));
                        let scan = (0..q).find(|&l| {
                            (0..dim).all(|i| phi2.get(i) == pr.mul(l, phi1.get(i)))
                        });
                        let got = proportionality_witness(&phi1, &phi2).unwrap();
                        assert_eq!(scan.is_some(), got.is_some());
                        if let Some(s) = got {
                            assert!((0..dim)
                                .all(|i| phi2.get(i) == pr.mul(s.value(), phi1.get(i))));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn inv_transpose_unitriangular() {
        // [[1,0,0],[0,1,0],[x,-z,1]] has inverse-transpose [[1,0,-x],[0,1,z],[0,0,1]].
        for &q in &[2u32, 3, 5] {
            let pr = p(q);
            for x in 0..q {
                for z in 0..q {
                    let m = MatP::from_nested(
                        pr,
                        &[vec![1, 0, 0], vec![0, 1, 0], vec![x, pr.neg(z), 1]],
                    )
                    .unwrap();
                    let it = inv_transpose(&m).unwrap();
                    let want = MatP::from_nested(
                        pr,
                        &[vec![1, 0, pr.neg(x)], vec![0, 1, z], vec![0, 0, 1]],
                    )
                    .unwrap();
                    assert_eq!(it, want);
                }
            }
        }
    }

    #[test]
    fn singular_matrix_refused() {
        let m = MatP::from_nested(p(2), &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(invert(&m).unwrap_err(), LinalgError::Singular);
    }

    #[test]
    fn prepared_solver_matches_solve_affine() {
        let pr = p(3);
        let a = MatP::from_nested(pr, &[vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let solver = PreparedSolver::new(&a);
        for bits in 0..27u32 {
            let b = VecP::from_u32s(pr, &[bits % 3, (bits / 3) % 3, (bits / 9) % 3]);
            let s = solve_affine(&a, &b).unwrap();
            let quick = solver.solve(&b);
            assert_eq!(s.is_consistent(), quick.is_some());
            if let Some(x) = quick {
                assert_eq!(a.mul_vec(&x).unwrap(), b);
            }
        }
        assert_eq!(solver.kernel_basis().len(), solve_affine_kernel_len(&a));
    }

    fn solve_affine_kernel_len(a: &MatP) -> usize {
        kernel_basis(a).len()
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(q in prop::sample::select(vec![2u32, 3, 5, 7]),
                              rows in 1usize..6, cols in 1usize..6,
                              seed in prop::collection::vec(0u32..7, 36)) {
            let pr = p(q);
            let m = MatP::from_fn(pr, rows, cols, |i, j| seed[i * 6 + j] % q);
            let r1 = rref(&m);
            let r2 = rref(&r1.reduced);
            prop_assert_eq!(&r1.reduced, &r2.reduced);
            prop_assert_eq!(r1.rank, r2.rank);

            let (naive, nrank) = naive_rref(q, &m.to_nested());
            prop_assert_eq!(r1.rank, nrank);
            prop_assert_eq!(r1.reduced.to_nested(), naive);
        }

        #[test]
        fn solutions_actually_solve(q in prop::sample::select(vec![2u32, 3, 5]),
                                    rows in 1usize..5, cols in 1usize..5,
                                    seed in prop::collection::vec(0u32..5, 25),
                                    bs in prop::collection::vec(0u32..5, 5)) {
            let pr = p(q);
            let a = MatP::from_fn(pr, rows, cols, |i, j| seed[i * 5 + j] % q);
            let b = VecP::from_u32s(pr, &bs[..rows].iter().map(|&x| x % q).collect::<Vec<_>>());
            let s = solve_affine(&a, &b).unwrap();
            if let Some(part) = &s.particular {
                prop_assert_eq!(a.mul_vec(part).unwrap(), b.clone());
                for k in &s.kernel_basis {
                    let mut shifted = part.clone();
                    shifted.add_scaled_assign(k, 1);
                    prop_assert_eq!(a.mul_vec(&shifted).unwrap(), b.clone());
                }
            } else {
                // Exhaustive refutation for small systems.
                let total = (q as u64).checked_pow(cols as u32).unwrap_or(u64::MAX);
                if total <= 625 {
                    for mut t in 0..total {
                        let digits: Vec<u32> = (0..cols).map(|_| {
                            let d = (t % q as u64) as u32;
                            t /= q as u64;
                            d
                        }).collect();
                        let x = VecP::from_u32s(pr, &digits);
                        prop_assert_ne!(a.mul_vec(&x).unwrap(), b.clone());
                    }
                }
            }
        }

        #[test]
        fn inv_transpose_is_an_involution(q in prop::sample::select(vec![2u32, 3, 5]),
                                          n in 1usize..5,
                                          seed in prop::collection::vec(0u32..5, 25)) {
            let pr = p(q);
            let m = MatP::from_fn(pr, n, n, |i, j| seed[i * 5 + j] % q);
            if let Ok(it) = inv_transpose(&m) {
                let back = inv_transpose(&it).unwrap();
                prop_assert_eq!(back, m.clone());
                prop_assert!(m.mul(&invert(&m).unwrap()).unwrap().is_identity());
            }
        }

        #[test]
        fn kernel_vectors_annihilate(q in prop::sample::select(vec![2u32, 3]),
                                     rows in 1usize..5, cols in 1usize..6,
                                     seed in prop::collection::vec(0u32..3, 30)) {
            let pr = p(q);
            let m = MatP::from_fn(pr, rows, cols, |i, j| seed[i * 6 + j] % q);
            let ker = kernel_basis(&m);
            prop_assert_eq!(ker.len(), cols - rank(&m));
            for k in &ker {
                prop_assert!(m.mul_vec(k).unwrap().is_zero());
            }
        }
    }
}
