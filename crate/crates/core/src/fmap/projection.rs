//! Euclidean projection onto `{y : F y = f, y ≥ ε}` for sequence-form
//! constraint matrices.
//!
//! The solver is a primal active-set method on the bound constraints. For a
//! working set `W` of components pinned at `ε`, the equality-constrained
//! subproblem has the closed form `y_S = z_S - F_Sᵀ λ` with
//! `(F_S F_Sᵀ) λ = F z' - f`, where `z'` is `z` with the pinned components
//! replaced by `ε`. Components enter `W` when a step would cross the bound
//! and leave it when their multiplier turns negative.

use crate::error::{Error, Result};
use crate::linalg::{solve_psd, Matrix};
use crate::scalar::Real;

/// Projection onto one sequence-form polytope with a componentwise floor.
#[derive(Debug, Clone)]
pub struct Projector<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    eps: T,
    // per sequence: child information sets, each a list of sequences
    children: Vec<Vec<Vec<usize>>>,
    top_down: Vec<usize>,
    need: Vec<T>,
}

impl<T: Real> Projector<T> {
    /// Parses `F` as a treeplex: the first row pins the empty sequence, every
    /// other row has one `-1` (the parent sequence) and `+1` on the actions
    /// of one information set with a zero right-hand side.
    pub fn new(f: &Matrix<T>, rhs: &[T], eps: T) -> Result<Self> {
        let (m, n) = (f.rows(), f.cols());
        if rhs.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: rhs.len() });
        }
        if m == 0 || n == 0 {
            return Err(Error::NotTreeplex("empty constraint matrix".into()));
        }
        if !(eps > T::zero()) {
            return Err(Error::Config("projection floor must be positive".into()));
        }
        let row0 = f.row(0);
        if row0[0] != T::one() || row0[1..].iter().any(|&v| v != T::zero()) {
            return Err(Error::NotTreeplex("first row must select the empty sequence".into()));
        }
        let mut children: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
        let mut has_parent = vec![false; n];
        for r in 1..m {
            let row = f.row(r);
            let mut parent = None;
            let mut kids = Vec::new();
            for (j, &v) in row.iter().enumerate() {
                if v == -T::one() {
                    if parent.replace(j).is_some() {
                        return Err(Error::NotTreeplex(format!("row {r} has two parents")));
                    }
                } else if v == T::one() {
                    kids.push(j);
                } else if v != T::zero() {
                    return Err(Error::NotTreeplex(format!("row {r} has entry {v}")));
                }
            }
            let parent = parent.ok_or_else(|| Error::NotTreeplex(format!("row {r} has no parent")))?;
            if kids.is_empty() || rhs[r] != T::zero() {
                return Err(Error::NotTreeplex(format!("row {r} is not an information set row")));
            }
            for &k in &kids {
                if k == 0 || std::mem::replace(&mut has_parent[k], true) {
                    return Err(Error::NotTreeplex(format!("sequence {k} has more than one parent")));
                }
            }
            children[parent].push(kids);
        }

        // depth-first order from the empty sequence; catches cycles and
        // orphans
        let mut top_down = Vec::with_capacity(n);
        let mut stack = vec![0usize];
        let mut seen = vec![false; n];
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::NotTreeplex("cycle in parent structure".into()));
            }
            top_down.push(s);
            for set in &children[s] {
                stack.extend(set.iter().copied());
            }
        }
        if top_down.len() != n {
            return Err(Error::NotTreeplex("sequence unreachable from the empty sequence".into()));
        }

        // smallest feasible weight of each sequence given the floor
        let mut need = vec![eps; n];
        for &s in top_down.iter().rev() {
            let below = children[s]
                .iter()
                .map(|set| set.iter().fold(T::zero(), |acc, &k| acc + need[k]))
                .fold(T::zero(), T::max);
            need[s] = need[s].max(below);
        }
        if need[0] > rhs[0] * (T::one() + T::lit(1e-12)) {
            return Err(Error::EmptyPolytope);
        }

        let rows = (0..m).map(|r| f.row(r).to_vec()).collect();
        Ok(Self { rows, rhs: rhs.to_vec(), eps, children, top_down, need })
    }

    pub fn dim(&self) -> usize {
        self.need.len()
    }

    pub fn floor(&self) -> T {
        self.eps
    }

    /// A feasible point: every sequence gets its minimum weight plus an equal
    /// share of its parent's surplus.
    pub fn interior_point(&self) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim()];
        y[0] = self.rhs[0];
        for &s in &self.top_down {
            for set in &self.children[s] {
                let floor = set.iter().fold(T::zero(), |acc, &k| acc + self.need[k]);
                let share = (y[s] - floor).max(T::zero()) / T::from_usize(set.len()).expect("size");
                for &k in set {
                    y[k] = self.need[k] + share;
                }
            }
        }
        y
    }

    /// Largest violation of `F y = f` and `y ≥ ε`.
    pub fn infeasibility(&self, y: &[T]) -> T {
        let eq = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &b)| (dot(row, y) - b).abs())
            .fold(T::zero(), T::max);
        let lower = y.iter().map(|&v| self.eps - v).fold(T::zero(), T::max);
        eq.max(lower)
    }

    pub fn project(&self, z: &[T]) -> Result<Vec<T>> {
        let start = self.interior_point();
        self.project_from(z, &start)
    }

    /// Projects `z`, starting the active-set iteration from the feasible
    /// point `start`. Starting near the answer (the previous iterate of a
    /// descent method) saves most of the iterations.
    pub fn project_from(&self, z: &[T], start: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
        if start.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: start.len() });
        }
        let scale = T::one() + z.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
        let step_tol = T::lit(1e-13) * scale;
        let mult_tol = T::lit(1e-12) * scale;

        let mut y = start.to_vec();
        let mut active: Vec<bool> = y.iter().map(|&v| v <= self.eps).collect();
        for (v, &a) in y.iter_mut().zip(&active) {
            if a {
                *v = self.eps;
            }
        }

        let max_iter = 20 * (n + self.rows.len()) + 100;
        for _ in 0..max_iter {
            let (cand, lambda) = self.equality_solve(z, &active);
            let step: Vec<T> = cand.iter().zip(&y).map(|(&c, &v)| c - v).collect();
            let step_norm = step.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
            if step_norm <= step_tol {
                // multipliers of the pinned bounds
                let ft_lambda = self.tr_mul(&lambda);
                let worst = (0..n)
                    .filter(|&i| active[i])
                    .map(|i| (i, cand[i] - z[i] + ft_lambda[i]))
                    .fold(None, |best: Option<(usize, T)>, (i, mu)| match best {
                        Some((_, b)) if b <= mu => best,
                        _ => Some((i, mu)),
                    });
                match worst {
                    Some((i, mu)) if mu < -mult_tol => {
                        active[i] = false;
                        y = cand;
                    }
                    _ => return Ok(cand),
                }
                continue;
            }

            let mut alpha = T::one();
            let mut blocking = None;
            for i in 0..n {
                if !active[i] && step[i] < T::zero() {
                    let ratio = (self.eps - y[i]) / step[i];
                    if ratio < alpha {
                        alpha = ratio.max(T::zero());
                        blocking = Some(i);
                    }
                }
            }
            for (v, &s) in y.iter_mut().zip(&step) {
                *v = *v + alpha * s;
            }
            if let Some(b) = blocking {
                active[b] = true;
                y[b] = self.eps;
            }
        }
        let residual = self.kkt_residual(z, &y);
        Err(Error::ProjectionStalled { iterations: max_iter, residual: residual.to_f64().unwrap_or(f64::NAN) })
    }

    fn tr_mul(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        for (row, &vi) in self.rows.iter().zip(v) {
            if vi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(row) {
                *o = *o + a * vi;
            }
        }
        out
    }

    // Minimizer of ‖y - z‖² subject to F y = f and y_i = ε for pinned i.
    fn equality_solve(&self, z: &[T], active: &[bool]) -> (Vec<T>, Vec<T>) {
        let pinned: Vec<T> = z
            .iter()
            .zip(active)
            .map(|(&v, &a)| if a { self.eps } else { v })
            .collect();
        let r: Vec<T> = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &b)| dot(row, &pinned) - b)
            .collect();
        let m = self.rows.len();
        let mut gram = vec![vec![T::zero(); m]; m];
        for a in 0..m {
            for b in a..m {
                let v = self.rows[a]
                    .iter()
                    .zip(&self.rows[b])
                    .zip(active)
                    .filter(|(_, &act)| !act)
                    .fold(T::zero(), |acc, ((&x, &y), _)| acc + x * y);
                gram[a][b] = v;
                gram[b][a] = v;
            }
        }
        let lambda = solve_psd(&gram, &r);
        let ft_lambda = self.tr_mul(&lambda);
        let y = pinned
            .iter()
            .zip(&ft_lambda)
            .zip(active)
            .map(|((&p, &c), &a)| if a { self.eps } else { p - c })
            .collect();
        (y, lambda)
    }

    /// Combined KKT residual of `y` as the projection of `z`: primal
    /// infeasibility, stationarity on free components, sign of the bound
    /// multipliers, and complementary slackness. Equality multipliers are
    /// fitted by least squares on the free components.
    pub fn kkt_residual(&self, z: &[T], y: &[T]) -> T {
        let n = self.dim();
        let act_tol = T::lit(1e-9);
        let active: Vec<bool> = y.iter().map(|&v| v - self.eps <= act_tol).collect();
        let diff: Vec<T> = y.iter().zip(z).map(|(&a, &b)| a - b).collect();
        let m = self.rows.len();
        let mut gram = vec![vec![T::zero(); m]; m];
        let mut rhs = vec![T::zero(); m];
        for a in 0..m {
            for b in 0..m {
                gram[a][b] = (0..n)
                    .filter(|&i| !active[i])
                    .fold(T::zero(), |acc, i| acc + self.rows[a][i] * self.rows[b][i]);
            }
            rhs[a] = (0..n)
                .filter(|&i| !active[i])
                .fold(T::zero(), |acc, i| acc + self.rows[a][i] * diff[i]);
        }
        let nu = solve_psd(&gram, &rhs);
        let ft_nu = self.tr_mul(&nu);
        let mut worst = self.infeasibility(y);
        for i in 0..n {
            let mu = diff[i] - ft_nu[i];
            if active[i] {
                worst = worst.max(-mu).max((mu * (y[i] - self.eps)).abs());
            } else {
                worst = worst.max(mu.abs());
            }
        }
        worst
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// One-shot projection of `z` onto `{y : F y = f, y ≥ ε}`.
pub fn project<T: Real>(f: &Matrix<T>, rhs: &[T], eps: T, z: &[T]) -> Result<Vec<T>> {
    Projector::new(f, rhs, eps)?.project(z)
}

/// KKT residual of `y` as the projection of `z`; see
/// [`Projector::kkt_residual`].
pub fn kkt_residual<T: Real>(f: &Matrix<T>, rhs: &[T], eps: T, z: &[T], y: &[T]) -> Result<T> {
    Ok(Projector::new(f, rhs, eps)?.kkt_residual(z, y))
}
