//! Exact two-phase primal simplex with Bland's rule, and the simplex-constrained
//! maximin problems built on it.
//!
//! Everything is dense; the problems solved here have at most a few dozen
//! rows and columns.

use crate::scalar::{min_of, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T> Constraint<T> {
    pub fn new(coeffs: Vec<T>, relation: Relation, rhs: T) -> Self {
        Self { coeffs, relation, rhs }
    }
}

/// `maximize objective · x` subject to `constraints`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LpOutcome<T> {
    pub fn optimal(self) -> Option<(Vec<T>, T)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

struct Tableau<T> {
    /// `rows[i]` holds the constraint coefficients followed by the rhs.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    width: usize,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, i: usize) -> &T {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, row: usize, col: usize, objective: &mut [T]) {
        let inv = T::one() / self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row {
                eliminate(r, &pivot_row, col);
            }
        }
        eliminate(objective, &pivot_row, col);
        self.basis[row] = col;
    }

    /// Reduced-cost row for `maximize cost · x` under the current basis.
    /// Entry `j` is `c_B B⁻¹ A_j - c_j`; the last entry is the objective value.
    fn objective_row(&self, cost: &[T]) -> Vec<T> {
        let mut obj: Vec<T> = (0..=self.width)
            .map(|j| if j < self.width { -cost[j].clone() } else { T::zero() })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                *o = o.clone() + cost[b].clone() * v.clone();
            }
        }
        obj
    }

    /// Runs Bland-rule pivots until optimal. Returns `false` if unbounded.
    fn optimize(&mut self, objective: &mut [T], allowed: &[bool]) -> bool {
        loop {
            let Some(col) = (0..self.width).find(|&j| allowed[j] && objective[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                Some((row, _)) => self.pivot(row, col, objective),
                None => return false,
            }
        }
    }
}

fn eliminate<T: Scalar>(target: &mut [T], pivot_row: &[T], col: usize) {
    let factor = target[col].clone();
    if factor.is_zero() {
        return;
    }
    for (t, p) in target.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *t = t.clone() - factor.clone() * p.clone();
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>) -> Self {
        Self { objective, constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width must match the objective");
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
        self
    }

    pub fn solve(&self) -> LpOutcome<T> {
        let n = self.num_vars();
        // Normalize to nonnegative right-hand sides.
        let normalized: Vec<(Vec<T>, Relation, T)> = self
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|v| -v.clone()).collect(), flipped, -c.rhs.clone())
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let n_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let n_art = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let width = n + n_slack + n_art;
        let art_start = n + n_slack;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut next_slack, mut next_art) = (n, art_start);
        for (coeffs, relation, rhs) in normalized {
            let mut row = coeffs;
            row.resize(width + 1, T::zero());
            match relation {
                Relation::Le => {
                    row[next_slack] = T::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -T::one();
                    next_slack += 1;
                    row[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            row[width] = rhs;
            rows.push(row);
        }
        let mut tab = Tableau { rows, basis, width };

        if n_art > 0 {
            let phase1_cost: Vec<T> = (0..width).map(|j| if j >= art_start { -T::one() } else { T::zero() }).collect();
            let mut obj = tab.objective_row(&phase1_cost);
            let all = vec![true; width];
            let bounded = tab.optimize(&mut obj, &all);
            debug_assert!(bounded, "phase one is bounded by zero");
            if obj[width].is_negative() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-valued artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < tab.rows.len() {
                if tab.basis[i] >= art_start {
                    match (0..art_start).find(|&j| !tab.rows[i][j].is_zero()) {
                        Some(col) => {
                            tab.pivot(i, col, &mut obj);
                            i += 1;
                        }
                        None => {
                            tab.rows.remove(i);
                            tab.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        let mut cost: Vec<T> = self.objective.clone();
        cost.resize(width, T::zero());
        let mut obj = tab.objective_row(&cost);
        let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
        if !tab.optimize(&mut obj, &allowed) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![T::zero(); n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rhs(i).clone();
            }
        }
        LpOutcome::Optimal { value: obj[width].clone(), x }
    }
}

/// An optimal simplex weighting for a maximin problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximinSolution<T> {
    /// Row weights, a point of the simplex.
    pub weights: Vec<T>,
    /// `min_k Σ_i weights[i] · matrix[i][k]`
    pub value: T,
}

/// `Σ_i w_i matrix[i][k]` for every column `k`.
pub fn weighted_columns<T: Scalar>(matrix: &[Vec<T>], weights: &[T]) -> Vec<T> {
    let cols = matrix.first().map_or(0, Vec::len);
    (0..cols)
        .map(|k| {
            weights
                .iter()
                .zip(matrix)
                .fold(T::zero(), |acc, (w, row)| acc + w.clone() * row[k].clone())
        })
        .collect()
}

fn check_matrix<T>(matrix: &[Vec<T>]) -> (usize, usize) {
    let rows = matrix.len();
    assert!(rows > 0, "maximin needs at least one row");
    let cols = matrix[0].len();
    assert!(cols > 0, "maximin needs at least one column");
    assert!(matrix.iter().all(|r| r.len() == cols), "ragged maximin matrix");
    (rows, cols)
}

/// Solves `max_{w ∈ S_rows} min_k Σ_i w_i matrix[i][k]`.
///
/// The matrix is shifted so that every entry is at least 1, which makes the
/// margin variable nonnegative at the optimum without splitting it.
pub fn maximin<T: Scalar>(matrix: &[Vec<T>]) -> MaximinSolution<T> {
    let (rows, cols) = check_matrix(matrix);
    let min_entry = min_of(matrix.iter().flatten()).expect("nonempty matrix");
    let shift = T::one() - min_entry;

    // variables: w_0..w_{rows-1}, mu
    let mut objective = vec![T::zero(); rows + 1];
    objective[rows] = T::one();
    let mut lp = LinearProgram::new(objective);
    for k in 0..cols {
        let mut coeffs: Vec<T> = matrix.iter().map(|row| row[k].clone() + shift.clone()).collect();
        coeffs.push(-T::one());
        lp.add(coeffs, Relation::Ge, T::zero());
    }
    let mut sum = vec![T::one(); rows];
    sum.push(T::zero());
    lp.add(sum, Relation::Eq, T::one());

    let (x, value) = lp.solve().optimal().expect("maximin LP is feasible and bounded");
    MaximinSolution { weights: x[..rows].to_vec(), value: value - shift }
}

/// Like [`maximin`], but among all optimal weightings returns the
/// lexicographically greatest one.
pub fn maximin_lex<T: Scalar>(matrix: &[Vec<T>]) -> MaximinSolution<T> {
    let best = maximin(matrix).value;
    maximin_lex_at(matrix, best)
}

/// [`maximin_lex`] when the optimal value `best` is already known.
pub fn maximin_lex_at<T: Scalar>(matrix: &[Vec<T>], best: T) -> MaximinSolution<T> {
    let (rows, cols) = check_matrix(matrix);
    let mut fixed: Vec<T> = Vec::with_capacity(rows);
    for target in 0..rows.saturating_sub(1) {
        let mut objective = vec![T::zero(); rows];
        objective[target] = T::one();
        let mut lp = LinearProgram::new(objective);
        for k in 0..cols {
            lp.add(matrix.iter().map(|row| row[k].clone()).collect(), Relation::Ge, best.clone());
        }
        lp.add(vec![T::one(); rows], Relation::Eq, T::one());
        for (j, v) in fixed.iter().enumerate() {
            let mut unit = vec![T::zero(); rows];
            unit[j] = T::one();
            lp.add(unit, Relation::Eq, v.clone());
        }
        let (_, value) = lp.solve().optimal().expect("optimal face is nonempty");
        fixed.push(value);
    }
    let rest = fixed.iter().fold(T::one(), |acc, v| acc - v.clone());
    fixed.push(rest);
    let value = min_of(&weighted_columns(matrix, &fixed)).expect("nonempty");
    debug_assert!(value == best);
    MaximinSolution { weights: fixed, value }
}
