//! Exponent matrices of invertible potentials and the finite groups
//! `G_A = Z^n / Z^n A^T` and `G_{A^T} = Z^n / Z^n A`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

/// Square matrix of nonnegative exponents with nonzero determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BHMatrix {
    n: usize,
    entries: Vec<i64>,
    det: i64,
    /// `D * A^{-1}` with `D = |det|`, row-major.
    inv_num: Vec<i64>,
}

/// Which of the two dual groups an element lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// `G_A`, coordinates `lambda A^{-T}`.
    A,
    /// `G_{A^T}`, coordinates `gamma A^{-1}`.
    AT,
}

impl Side {
    pub fn dual(self) -> Side {
        match self {
            Side::A => Side::AT,
            Side::AT => Side::A,
        }
    }
}

/// A class in `G_A` or `G_{A^T}`: an integer representative together with
/// its fractional coordinates `num[i] / den`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub num: Vec<i64>,
    pub den: i64,
    pub rep: Vec<i64>,
}

impl GroupElement {
    pub fn n(&self) -> usize {
        self.num.len()
    }

    pub fn frac(&self, i: usize) -> Q {
        Q::new(self.num[i], self.den)
    }

    pub fn fracs(&self) -> Vec<Q> {
        (0..self.n()).map(|i| self.frac(i)).collect()
    }

    /// Sum of the coordinates of this representative (not reduced mod 1).
    pub fn age(&self) -> Q {
        Q::new(self.num.iter().sum(), self.den)
    }

    /// Number of integral coordinates.
    pub fn dim(&self) -> usize {
        self.num.iter().filter(|&&x| x % self.den == 0).count()
    }

    /// Indices of integral coordinates.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.num[i] % self.den == 0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x % self.den == 0)
    }

    /// Numerators reduced into `[0, den)`.
    pub fn reduced_num(&self) -> Vec<i64> {
        self.num.iter().map(|x| x.mod_floor(&self.den)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomKind {
    Fermat,
    Chain,
    Loop,
}

/// One invertible block `x_1^{a_1} x_2 + ... `, variables listed in chain order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub kind: AtomKind,
    pub vars: Vec<usize>,
    pub exponents: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub invertible: bool,
    pub det: i64,
    pub det_divides: bool,
    pub weights: Vec<Q>,
    pub atoms: core::result::Result<Vec<Atom>, Error>,
    pub calabi_yau: bool,
    pub j_in_g: bool,
    pub j_in_gt: bool,
}

impl ValidationReport {
    /// All structural conditions hold: decomposable with positive weights.
    pub fn is_invertible_potential(&self) -> bool {
        self.atoms.is_ok() && self.weights.iter().all(|w| *w > Q::from_integer(0))
    }
}

fn bareiss_det(m: &[i128], n: usize) -> i128 {
    if n == 0 {
        return 1;
    }
    let mut a = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                return 0;
            };
            for c in 0..n {
                a.swap(k * n + c, swap * n + c);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[n * n - 1]
}

impl BHMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NonSquare { rows: n, bad: r, len: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                if v < 0 {
                    return Err(Error::NegativeEntry { row: r, col: c, value: v });
                }
            }
        }
        let entries: Vec<i64> = rows.into_iter().flatten().collect();
        Self::from_entries(n, entries)
    }

    fn from_entries(n: usize, entries: Vec<i64>) -> Result<Self> {
        let wide: Vec<i128> = entries.iter().map(|&x| x as i128).collect();
        let det = bareiss_det(&wide, n);
        if det == 0 {
            return Err(Error::ZeroDeterminant);
        }
        let det = i64::try_from(det).map_err(|_| Error::Overflow("determinant"))?;
        let sign = det.signum() as i128;
        // inv_num[i][j] = sign * adj[i][j] = sign * (-1)^{i+j} * minor(j, i)
        let mut inv_num = vec![0i64; n * n];
        if n > 0 {
            let mut minor = vec![0i128; (n - 1) * (n - 1)];
            for i in 0..n {
                for j in 0..n {
                    let mut idx = 0;
                    for r in (0..n).filter(|&r| r != j) {
                        for c in (0..n).filter(|&c| c != i) {
                            minor[idx] = wide[r * n + c];
                            idx += 1;
                        }
                    }
                    let cof = bareiss_det(&minor, n - 1) * if (i + j) % 2 == 0 { 1 } else { -1 };
                    inv_num[i * n + j] =
                        i64::try_from(sign * cof).map_err(|_| Error::Overflow("adjugate"))?;
                }
            }
        }
        Ok(BHMatrix { n, entries, det, inv_num })
    }

    pub fn identity(n: usize) -> Self {
        let mut rows = vec![vec![0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
        }
        Self::new(rows).expect("identity is invertible")
    }

    pub fn diagonal(d: &[i64]) -> Result<Self> {
        let n = d.len();
        let mut rows = vec![vec![0; n]; n];
        for i in 0..n {
            rows[i][i] = d[i];
        }
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    /// `|det A|`, the common denominator of all fractional coordinates.
    pub fn order(&self) -> i64 {
        self.det.abs()
    }

    /// `D * (A^{-1})_{ij}`.
    pub fn inv_num(&self, i: usize, j: usize) -> i64 {
        self.inv_num[i * self.n + j]
    }

    pub fn transpose(&self) -> BHMatrix {
        let n = self.n;
        let mut e = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[j * n + i] = self.entries[i * n + j];
            }
        }
        BHMatrix::from_entries(n, e).expect("transpose of invertible matrix")
    }

    fn check_len(&self, v: &[i64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
        }
        Ok(())
    }

    /// Unreduced numerators of `v A^{-T}` (side A) or `v A^{-1}` (side AT) over `|det|`.
    pub fn frac_num(&self, side: Side, v: &[i64]) -> Vec<i64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match side {
                        Side::A => v[j] * self.inv_num(i, j),
                        Side::AT => v[j] * self.inv_num(j, i),
                    })
                    .sum()
            })
            .collect()
    }

    /// Integer vector with fractional coordinates `num / D`, i.e. `num A^T / D`
    /// or `num A / D`. Panics if the result is not integral.
    fn rep_from_num(&self, side: Side, num: &[i64]) -> Vec<i64> {
        let n = self.n;
        let d = self.order();
        (0..n)
            .map(|j| {
                let s: i64 = (0..n)
                    .map(|i| match side {
                        Side::A => num[i] * self.get(j, i),
                        Side::AT => num[i] * self.get(i, j),
                    })
                    .sum();
                debug_assert_eq!(s % d, 0);
                s / d
            })
            .collect()
    }

    /// Canonical element from (possibly unreduced) numerators.
    pub fn from_num(&self, side: Side, num: &[i64]) -> GroupElement {
        let d = self.order();
        let num: Vec<i64> = num.iter().map(|x| x.mod_floor(&d)).collect();
        let rep = self.rep_from_num(side, &num);
        GroupElement { num, den: d, rep }
    }

    /// Canonical representative of the class of `v`.
    pub fn element(&self, side: Side, v: &[i64]) -> Result<GroupElement> {
        self.check_len(v)?;
        Ok(self.from_num(side, &self.frac_num(side, v)))
    }

    /// `v` kept as is, with its unreduced coordinates.
    pub fn raw_element(&self, side: Side, v: &[i64]) -> Result<GroupElement> {
        self.check_len(v)?;
        Ok(GroupElement { num: self.frac_num(side, v), den: self.order(), rep: v.to_vec() })
    }

    pub fn j(&self) -> Vec<i64> {
        vec![1; self.n]
    }

    /// Charge vector `q = J A^{-T}`.
    pub fn weights(&self) -> Vec<Q> {
        let num = self.frac_num(Side::A, &self.j());
        num.into_iter().map(|x| Q::new(x, self.order())).collect()
    }

    /// Integer weights `w` and degree `d` with `q = w / d`, `d` minimal.
    pub fn integer_weights(&self) -> (Vec<i64>, i64) {
        let q = self.weights();
        let d = q.iter().fold(1i64, |acc, x| acc.lcm(x.denom()));
        (q.iter().map(|x| (x * d).to_integer()).collect(), d)
    }

    /// `J A^{-T} J^T`.
    pub fn central_charge(&self) -> Q {
        self.weights().into_iter().fold(Q::from_integer(0), |a, b| a + b)
    }

    pub fn is_calabi_yau(&self) -> bool {
        self.central_charge().is_integer()
    }

    /// Submatrix on the given (sorted) index set.
    pub fn submatrix(&self, idx: &[usize]) -> BHMatrix {
        let k = idx.len();
        let mut e = Vec::with_capacity(k * k);
        for &r in idx {
            for &c in idx {
                e.push(self.get(r, c));
            }
        }
        BHMatrix::from_entries(k, e).expect("principal block of an invertible potential")
    }

    /// `A^lambda`: the block on the integral coordinates of `lambda`, with its index set.
    pub fn restrict(&self, lambda: &GroupElement) -> (BHMatrix, Vec<usize>) {
        let s = lambda.support();
        (self.submatrix(&s), s)
    }

    /// Pairing `x . y` where `x` lives on one side and `y` on the other, as a numerator over D.
    pub fn pairing_num(x: &GroupElement, y: &GroupElement) -> i64 {
        x.num.iter().zip(&y.rep).map(|(a, b)| a * b).sum()
    }

    /// `Z^n / Z^n M` through the Smith normal form of `M = A^T` (side A) or `A` (side AT).
    pub fn enumerate_group(&self, side: Side) -> Vec<GroupElement> {
        let n = self.n;
        let m: Vec<i64> = match side {
            Side::A => self.transpose().entries,
            Side::AT => self.entries.clone(),
        };
        let (diag, qinv) = smith_normal_form(&m, n);
        let mut out = BTreeSet::new();
        let mut y = vec![0i64; n];
        loop {
            let x: Vec<i64> =
                (0..n).map(|j| (0..n).map(|i| y[i] * qinv[i * n + j]).sum()).collect();
            out.insert(self.element(side, &x).expect("length n"));
            let mut i = 0;
            while i < n {
                y[i] += 1;
                if y[i] < diag[i] {
                    break;
                }
                y[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        out.into_iter().collect()
    }

    /// Subgroup generated by the given integer vectors.
    pub fn span(&self, side: Side, generators: &[Vec<i64>]) -> Result<SymmetryGroup> {
        let gens: Vec<GroupElement> =
            generators.iter().map(|g| self.element(side, g)).collect::<Result<_>>()?;
        Ok(self.span_elements(side, gens))
    }

    fn span_elements(&self, side: Side, gens: Vec<GroupElement>) -> SymmetryGroup {
        let d = self.order();
        let zero = vec![0i64; self.n];
        let mut seen = BTreeSet::new();
        seen.insert(zero.clone());
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y: Vec<i64> = x.iter().zip(&g.num).map(|(a, b)| (a + b) % d).collect();
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let elements = seen.into_iter().map(|num| self.from_num(side, &num)).collect();
        SymmetryGroup { side, generators: gens, elements }
    }

    /// `G^T`: elements of the dual group pairing integrally with every element of `g`.
    pub fn transpose_group(&self, g: &SymmetryGroup) -> SymmetryGroup {
        let side = g.side.dual();
        let d = self.order();
        let test: &[GroupElement] =
            if g.generators.is_empty() { &g.elements } else { &g.generators };
        let elements: Vec<GroupElement> = self
            .enumerate_group(side)
            .into_iter()
            .filter(|x| test.iter().all(|y| Self::pairing_num(x, y) % d == 0))
            .collect();
        // greedy generating set
        let mut gens: Vec<GroupElement> = Vec::new();
        let mut current = self.span_elements(side, Vec::new());
        for e in &elements {
            if current.elements.len() == elements.len() {
                break;
            }
            if !current.contains(e) {
                gens.push(e.clone());
                current = self.span_elements(side, gens.clone());
            }
        }
        SymmetryGroup { side, generators: gens, elements }
    }

    /// `<J>` inside `G_A`.
    pub fn j_group(&self) -> SymmetryGroup {
        self.span(Side::A, &[self.j()]).expect("length n")
    }

    /// Decomposition into Fermat / chain / loop blocks after a simultaneous permutation.
    pub fn atoms(&self) -> Result<Vec<Atom>> {
        let n = self.n;
        let mut nz: Vec<Vec<usize>> = Vec::with_capacity(n);
        for r in 0..n {
            let cols: Vec<usize> = (0..n).filter(|&c| self.get(r, c) != 0).collect();
            if cols.is_empty() || cols.len() > 2 {
                return Err(Error::NotDecomposable);
            }
            nz.push(cols);
        }
        let mut main = vec![usize::MAX; n];
        let mut used = vec![false; n];
        if !self.assign_mains(0, &nz, &mut main, &mut used) {
            return Err(Error::NotDecomposable);
        }
        Ok(self.atoms_from_mains(&nz, &main))
    }

    fn pointer(&self, nz: &[Vec<usize>], main: &[usize], r: usize) -> Option<usize> {
        nz[r].iter().copied().find(|&c| c != main[r])
    }

    fn assign_mains(
        &self,
        r: usize,
        nz: &[Vec<usize>],
        main: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        let n = self.n;
        if r == n {
            // pointer graph on variables must have in-degree <= 1
            let mut indeg = vec![0; n];
            for row in 0..n {
                if let Some(t) = self.pointer(nz, main, row) {
                    indeg[t] += 1;
                    if indeg[t] > 1 {
                        return false;
                    }
                }
            }
            return true;
        }
        for &c in &nz[r] {
            if used[c] {
                continue;
            }
            if nz[r].len() == 2 {
                let other = if nz[r][0] == c { nz[r][1] } else { nz[r][0] };
                if self.get(r, other) != 1 {
                    continue;
                }
            }
            main[r] = c;
            used[c] = true;
            if self.assign_mains(r + 1, nz, main, used) {
                return true;
            }
            used[c] = false;
        }
        false
    }

    fn atoms_from_mains(&self, nz: &[Vec<usize>], main: &[usize]) -> Vec<Atom> {
        let n = self.n;
        let mut row_of = vec![0; n];
        for r in 0..n {
            row_of[main[r]] = r;
        }
        let next = |v: usize| self.pointer(nz, main, row_of[v]);
        let mut has_pred = vec![false; n];
        for v in 0..n {
            if let Some(t) = next(v) {
                has_pred[t] = true;
            }
        }
        let mut seen = vec![false; n];
        let mut atoms = Vec::new();
        let walk = |start: usize, seen: &mut Vec<bool>| {
            let mut vars = Vec::new();
            let mut v = start;
            loop {
                seen[v] = true;
                vars.push(v);
                match next(v) {
                    Some(t) if !seen[t] => v = t,
                    Some(_) => return (vars, true),
                    None => return (vars, false),
                }
            }
        };
        for s in 0..n {
            if !has_pred[s] && !seen[s] {
                let (vars, _) = walk(s, &mut seen);
                let kind = if vars.len() == 1 { AtomKind::Fermat } else { AtomKind::Chain };
                atoms.push(self.make_atom(kind, vars, &row_of));
            }
        }
        for s in 0..n {
            if !seen[s] {
                let (vars, _) = walk(s, &mut seen);
                atoms.push(self.make_atom(AtomKind::Loop, vars, &row_of));
            }
        }
        atoms
    }

    fn make_atom(&self, kind: AtomKind, vars: Vec<usize>, row_of: &[usize]) -> Atom {
        let exponents = vars.iter().map(|&v| self.get(row_of[v], v)).collect();
        Atom { kind, vars, exponents }
    }
}

/// Smith normal form of an `n x n` integer matrix `m` (row-major).
/// Returns the diagonal and `Q^{-1}` where `P m Q` is diagonal.
pub fn smith_normal_form(m: &[i64], n: usize) -> (Vec<i64>, Vec<i64>) {
    let mut a = m.to_vec();
    let mut qinv = vec![0i64; n * n];
    for i in 0..n {
        qinv[i * n + i] = 1;
    }
    let at = |a: &Vec<i64>, r: usize, c: usize| a[r * n + c];
    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for r in t..n {
                for c in t..n {
                    let v = at(&a, r, c);
                    if v != 0 && best.map_or(true, |(br, bc)| v.abs() < at(&a, br, bc).abs()) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((br, bc)) = best else { break };
            if br != t {
                for c in 0..n {
                    a.swap(br * n + c, t * n + c);
                }
            }
            if bc != t {
                for r in 0..n {
                    a.swap(r * n + bc, r * n + t);
                }
                for c in 0..n {
                    qinv.swap(bc * n + c, t * n + c);
                }
            }
            let piv = at(&a, t, t);
            let mut clean = true;
            for r in t + 1..n {
                let f = at(&a, r, t) / piv;
                if f != 0 {
                    for c in t..n {
                        a[r * n + c] -= f * a[t * n + c];
                    }
                }
                if at(&a, r, t) != 0 {
                    clean = false;
                }
            }
            for c in t + 1..n {
                let f = at(&a, t, c) / piv;
                if f != 0 {
                    // col_c -= f * col_t ; Qinv row_t += f * row_c
                    for r in 0..n {
                        a[r * n + c] -= f * a[r * n + t];
                    }
                    for k in 0..n {
                        qinv[t * n + k] += f * qinv[c * n + k];
                    }
                }
                if at(&a, t, c) != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into row t
            let bad = (t + 1..n)
                .flat_map(|r| (t + 1..n).map(move |c| (r, c)))
                .find(|&(r, c)| at(&a, r, c) % piv != 0);
            match bad {
                Some((r, _)) => {
                    for c in t..n {
                        a[t * n + c] += a[r * n + c];
                    }
                }
                None => break,
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].abs().max(1)).collect();
    (diag, qinv)
}

/// Finite subgroup of `G_A` or `G_{A^T}` with its elements in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryGroup {
    pub side: Side,
    pub generators: Vec<GroupElement>,
    pub elements: Vec<GroupElement>,
}

impl SymmetryGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        let key = x.reduced_num();
        self.elements.binary_search_by(|e| e.num.cmp(&key)).is_ok()
    }

    pub fn contains_num(&self, num: &[i64], den: i64) -> bool {
        let key: Vec<i64> = num.iter().map(|x| x.mod_floor(&den)).collect();
        self.elements.binary_search_by(|e| e.num.as_slice().cmp(key.as_slice())).is_ok()
    }
}

/// Validation with `G = <J>`.
pub fn validate(a: &BHMatrix, p: u64) -> ValidationReport {
    validate_with_group(a, p, &a.j_group())
}

pub fn validate_with_group(a: &BHMatrix, p: u64, g: &SymmetryGroup) -> ValidationReport {
    let weights = a.weights();
    let atoms = a.atoms();
    let atoms = match atoms {
        Ok(v) if weights.iter().all(|w| *w > Q::from_integer(0)) => Ok(v),
        Ok(_) => {
            let index = weights.iter().position(|w| *w <= Q::from_integer(0)).unwrap_or(0);
            Err(Error::NonPositiveWeight { index })
        }
        Err(e) => Err(e),
    };
    let j_a = a.element(Side::A, &a.j()).expect("length n");
    let j_at = a.element(Side::AT, &a.j()).expect("length n");
    let d = a.order();
    let test: &[GroupElement] =
        if g.generators.is_empty() { &g.elements } else { &g.generators };
    let j_in_gt = test.iter().all(|x| BHMatrix::pairing_num(&j_at, x) % d == 0);
    ValidationReport {
        invertible: true,
        det: a.det(),
        det_divides: p > 1 && ((p - 1) as i64) % d == 0,
        weights,
        atoms,
        calabi_yau: a.is_calabi_yau(),
        j_in_g: g.contains(&j_a),
        j_in_gt,
    }
}
