//! Dense two-phase simplex with dual values.
//!
//! Problems here are tiny (tens of rows, a few hundred columns), so a dense
//! tableau is the simplest thing that is exact enough. Dual values follow the
//! convention `c − Aᵀy ≥ 0` on nonnegative columns, so for a minimisation the
//! optimal objective equals `bᵀy` plus the constant from shifted bounds.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("infeasible (phase-one residual {0:.3e})")]
    Infeasible(f64),
    #[error("unbounded")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarBound {
    NonNeg,
    Free,
    Boxed(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<f64>,
    sense: Sense,
    rhs: f64,
}

/// `minimize cᵀx` subject to linear rows and per-variable bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    bounds: Vec<VarBound>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual per user row, in insertion order.
    pub duals: Vec<f64>,
    /// Duals of the upper-bound rows of boxed variables (zero for other kinds).
    pub bound_duals: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            bounds: vec![VarBound::NonNeg; n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bound(&mut self, j: usize, b: VarBound) {
        self.bounds[j] = b;
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let n = self.objective.len();
        // Column layout of the standard form.
        enum ColMap {
            Plain(usize),
            Split(usize, usize),
            Shift(usize, f64),
        }
        let mut maps = Vec::with_capacity(n);
        let mut ncols = 0;
        let mut boxed = Vec::new();
        for (j, b) in self.bounds.iter().enumerate() {
            match *b {
                VarBound::NonNeg => {
                    maps.push(ColMap::Plain(ncols));
                    ncols += 1;
                }
                VarBound::Free => {
                    maps.push(ColMap::Split(ncols, ncols + 1));
                    ncols += 2;
                }
                VarBound::Boxed(lo, hi) => {
                    maps.push(ColMap::Shift(ncols, lo));
                    boxed.push((j, ncols, hi - lo));
                    ncols += 1;
                }
            }
        }
        let n_slack_rows = self.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let total_cols = ncols + n_slack_rows + boxed.len();
        let m = self.rows.len() + boxed.len();
        let mut a = vec![vec![0.0; total_cols]; m];
        let mut b = vec![0.0; m];
        let mut c = vec![0.0; total_cols];
        let mut constant = 0.0;
        for (j, map) in maps.iter().enumerate() {
            match *map {
                ColMap::Plain(k) => c[k] = self.objective[j],
                ColMap::Split(k, l) => {
                    c[k] = self.objective[j];
                    c[l] = -self.objective[j];
                }
                ColMap::Shift(k, lo) => {
                    c[k] = self.objective[j];
                    constant += self.objective[j] * lo;
                }
            }
        }
        let mut slack = ncols;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rhs = row.rhs;
            for (j, map) in maps.iter().enumerate() {
                let v = row.coeffs[j];
                if v == 0.0 {
                    continue;
                }
                match *map {
                    ColMap::Plain(k) => a[i][k] = v,
                    ColMap::Split(k, l) => {
                        a[i][k] = v;
                        a[i][l] = -v;
                    }
                    ColMap::Shift(k, lo) => {
                        a[i][k] = v;
                        rhs -= v * lo;
                    }
                }
            }
            match row.sense {
                Sense::Le => {
                    a[i][slack] = 1.0;
                    slack += 1;
                }
                Sense::Ge => {
                    a[i][slack] = -1.0;
                    slack += 1;
                }
                Sense::Eq => {}
            }
            b[i] = rhs;
        }
        for (t, &(_, k, width)) in boxed.iter().enumerate() {
            let i = self.rows.len() + t;
            a[i][k] = 1.0;
            a[i][slack] = 1.0;
            slack += 1;
            b[i] = width;
        }

        let (z, y, obj) = simplex_standard(&a, &b, &c)?;
        let x = maps
            .iter()
            .map(|map| match *map {
                ColMap::Plain(k) => z[k],
                ColMap::Split(k, l) => z[k] - z[l],
                ColMap::Shift(k, lo) => z[k] + lo,
            })
            .collect();
        let mut bound_duals = vec![0.0; n];
        for (t, &(j, _, _)) in boxed.iter().enumerate() {
            bound_duals[j] = y[self.rows.len() + t];
        }
        Ok(LpSolution {
            x,
            objective: obj + constant,
            duals: y[..self.rows.len()].to_vec(),
            bound_duals,
        })
    }
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;

/// `min cᵀz, Az = b, z ≥ 0`. Returns `(z, y, cᵀz)`.
fn simplex_standard(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, f64), LpError> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut signs = vec![1.0; m];
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        if b[i] < 0.0 {
            signs[i] = -1.0;
        }
        for j in 0..n {
            t[i][j] = signs[i] * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = signs[i] * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let scale = 1.0 + b.iter().fold(0.0_f64, |s, v| s.max(v.abs()));

    // Phase one: minimise the sum of artificials.
    let mut cost1 = vec![0.0; n + m];
    for v in cost1.iter_mut().skip(n) {
        *v = 1.0;
    }
    run_simplex(&mut t, &mut basis, &cost1, n)?;
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &k)| k >= n)
        .map(|(i, _)| t[i][width - 1])
        .sum();
    if infeas > 1e-8 * scale {
        return Err(LpError::Infeasible(infeas));
    }
    // Drive remaining artificials out where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).max_by(|&x, &y| t[i][x].abs().total_cmp(&t[i][y].abs())) {
                if t[i][j].abs() > 1e-9 {
                    pivot(&mut t, i, j);
                    basis[i] = j;
                }
            }
        }
    }

    let mut cost2 = c.to_vec();
    cost2.extend(std::iter::repeat(0.0).take(m));
    run_simplex(&mut t, &mut basis, &cost2, n)?;

    let mut z = vec![0.0; n];
    for (i, &k) in basis.iter().enumerate() {
        if k < n {
            z[k] = t[i][width - 1];
        }
    }
    let mut y = vec![0.0; m];
    for (k, yk) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for (i, &bi) in basis.iter().enumerate() {
            s += cost2[bi] * t[i][n + k];
        }
        *yk = signs[k] * s;
    }
    let obj = c.iter().zip(&z).map(|(ci, zi)| ci * zi).sum();
    Ok((z, y, obj))
}

fn pivot(t: &mut [Vec<f64>], r: usize, col: usize) {
    let width = t[r].len();
    let pv = t[r][col];
    for v in t[r].iter_mut() {
        *v /= pv;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[col];
        if f != 0.0 {
            for j in 0..width {
                row[j] -= f * prow[j];
            }
            row[col] = 0.0;
        }
    }
}

/// Primal simplex on the tableau; only the first `enter_limit` columns may enter.
fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    enter_limit: usize,
) -> Result<(), LpError> {
    let m = t.len();
    if m == 0 {
        return Ok(());
    }
    let width = t[0].len();
    let rhs_scale = t.iter().fold(1.0_f64, |s, row| s.max(row[width - 1].abs()));
    let mut degenerate_run = 0usize;
    // Once degeneracy has stalled progress, Bland's rule stays on: it cannot cycle.
    let mut bland = false;
    for _iter in 0..100_000 {
        // Reduced costs.
        let cmax = cost.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        let mut entering = None;
        let mut best = -COST_TOL * cmax;
        bland |= degenerate_run > 40;
        for j in 0..enter_limit {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                r -= cost[basis[i]] * t[i][j];
            }
            if r < best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = r;
            }
        }
        let Some(col) = entering else { return Ok(()) };
        let mut leave = None;
        let mut ratio = f64::INFINITY;
        for i in 0..m {
            let v = t[i][col];
            if v > PIVOT_TOL {
                let rt = t[i][width - 1].max(0.0) / v;
                let better = match leave {
                    None => true,
                    Some(l) => rt < ratio - 1e-14 || (rt <= ratio + 1e-14 && basis[i] < basis[l]),
                };
                if better {
                    ratio = rt;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            return Err(LpError::Unbounded);
        };
        if ratio.abs() < 1e-9 * rhs_scale {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(t, r, col);
        basis[r] = col;
        for row in t.iter_mut() {
            // Right-hand sides at round-off level are degenerate zeros.
            if row[width - 1].abs() < 1e-12 * rhs_scale {
                row[width - 1] = 0.0;
            }
        }
    }
    Err(LpError::IterationLimit)
}

#[cfg(test)]
mod tests {
    /// A degenerate master problem from projective column generation that
    /// used to cycle on round-off-level right-hand sides.
    #[test]
    fn degenerate_master_problem_terminates() {
        let mut lp = LinearProgram::new(vec![
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
        ]);
        lp.add_row(
            vec![
                1.0,
                0.0,
                0.9584082445597043,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.2746906020381578,
                -0.0,
                0.2632652637474462,
                0.003916211101917608,
                0.37562498596865285,
                0.2759086192357368,
                0.2404514016022591,
                0.2957640404419363,
                0.32471652022149317,
                0.31183165451993955,
                0.2202595666478999,
                0.30582770989677305,
                0.2686942588920247,
                0.2512104004856741,
                0.22400222154978372,
                0.2555433032261301,
                0.2764831773841445,
                0.26849440086023796,
                0.2573765431544783,
                0.2789611314936778,
                0.2582243639515497,
                0.26516743677783033,
                0.26242222073312677,
                0.2665830312394857,
                0.26261107607779605,
                0.26698186492589765,
                0.263179876406653,
                0.2655935436674652,
                0.26510292585682926,
                -1.0,
                -0.0,
                -0.9584082445597043,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.2746906020381578,
                0.0,
                -0.2632652637474462,
                -0.003916211101917608,
                -0.37562498596865285,
                -0.2759086192357368,
                -0.2404514016022591,
                -0.2957640404419363,
                -0.32471652022149317,
                -0.31183165451993955,
                -0.2202595666478999,
                -0.30582770989677305,
                -0.2686942588920247,
                -0.2512104004856741,
                -0.22400222154978372,
                -0.2555433032261301,
                -0.2764831773841445,
                -0.26849440086023796,
                -0.2573765431544783,
                -0.2789611314936778,
                -0.2582243639515497,
                -0.26516743677783033,
                -0.26242222073312677,
                -0.2665830312394857,
                -0.26261107607779605,
                -0.26698186492589765,
                -0.263179876406653,
                -0.2655935436674652,
                -0.26510292585682926,
            ],
            Sense::Eq,
            0.3946914357886977,
        );
        lp.add_row(
            vec![
                0.0,
                1.0,
                -0.2854008352475264,
                0.0,
                0.0,
                -0.0,
                0.0,
                0.0,
                -0.0,
                0.0,
                0.0,
                -0.0,
                0.0,
                -0.2746856082904698,
                -0.07839709405005202,
                0.013151027613074288,
                -0.0661525047769251,
                -0.21467820994263342,
                -0.08400777328068086,
                -0.060383257176614455,
                -0.0830236355568217,
                -0.08607226368490015,
                -0.04315762788065629,
                -0.10378393972422227,
                -0.07663226379595955,
                -0.07910354035551935,
                -0.0851575998269152,
                -0.08241761174541623,
                -0.08435610829205897,
                -0.08305490692346167,
                -0.07559811706929048,
                -0.07902111323873186,
                -0.07806267602702222,
                -0.0776542404374608,
                -0.0795137341589567,
                -0.07930879396441448,
                -0.0780462337738111,
                -0.08092609926912336,
                -0.07906424939092502,
                -0.07907636010038509,
                -0.07936560454514155,
                -0.0,
                -1.0,
                0.2854008352475264,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                0.2746856082904698,
                0.07839709405005202,
                -0.013151027613074288,
                0.0661525047769251,
                0.21467820994263342,
                0.08400777328068086,
                0.060383257176614455,
                0.0830236355568217,
                0.08607226368490015,
                0.04315762788065629,
                0.10378393972422227,
                0.07663226379595955,
                0.07910354035551935,
                0.0851575998269152,
                0.08241761174541623,
                0.08435610829205897,
                0.08305490692346167,
                0.07559811706929048,
                0.07902111323873186,
                0.07806267602702222,
                0.0776542404374608,
                0.0795137341589567,
                0.07930879396441448,
                0.0780462337738111,
                0.08092609926912336,
                0.07906424939092502,
                0.07907636010038509,
                0.07936560454514155,
            ],
            Sense::Eq,
            -0.11753369827373442,
        );
        lp.add_row(
            vec![
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.9582948762798584,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.04125793467589615,
                -0.0,
                0.03954654834805258,
                -0.2167668086150382,
                -0.11806778230469257,
                -0.01699279118410749,
                -0.0030240207267335363,
                -0.07269040342425119,
                -0.0014606458798793898,
                0.03312806124635837,
                0.004442610234148791,
                0.023099832716676018,
                0.02017589893188559,
                0.009091526828937387,
                0.03485928727477171,
                0.029321882027257506,
                0.027632235463541332,
                0.03557627947862836,
                0.03093764664600641,
                0.03300329100630433,
                0.03850142598384443,
                0.03700142767191766,
                0.03626060353115108,
                0.036530375572729354,
                0.0377226003109132,
                0.03885312374689689,
                0.03889931476821594,
                0.03834424028103332,
                0.038622118468539586,
                -0.0,
                -0.0,
                -0.0,
                -1.0,
                -0.0,
                -0.9582948762798584,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.04125793467589615,
                0.0,
                -0.03954654834805258,
                0.2167668086150382,
                0.11806778230469257,
                0.01699279118410749,
                0.0030240207267335363,
                0.07269040342425119,
                0.0014606458798793898,
                -0.03312806124635837,
                -0.004442610234148791,
                -0.023099832716676018,
                -0.02017589893188559,
                -0.009091526828937387,
                -0.03485928727477171,
                -0.029321882027257506,
                -0.027632235463541332,
                -0.03557627947862836,
                -0.03093764664600641,
                -0.03300329100630433,
                -0.03850142598384443,
                -0.03700142767191766,
                -0.03626060353115108,
                -0.036530375572729354,
                -0.0377226003109132,
                -0.03885312374689689,
                -0.03889931476821594,
                -0.03834424028103332,
                -0.038622118468539586,
            ],
            Sense::Eq,
            0.05928180052058601,
        );
        lp.add_row(
            vec![
                0.0,
                0.0,
                -0.0,
                0.0,
                1.0,
                -0.2857812626743944,
                0.0,
                0.0,
                -0.0,
                0.0,
                0.0,
                -0.0,
                0.0,
                -0.04131706605138506,
                -0.011776466162172455,
                -0.7279245708430995,
                0.020793290714595694,
                0.013221703633029006,
                0.0010565180569324822,
                0.014840490134229514,
                0.00037345845886116647,
                -0.009144059564304917,
                -0.0008704844117426531,
                -0.007839026905430906,
                -0.005754216021006195,
                -0.0028628271680461253,
                -0.013252249086899079,
                -0.009456868789196656,
                -0.00843070406368904,
                -0.011005013777991672,
                -0.009087183331968843,
                -0.009348817815212728,
                -0.01163919739083623,
                -0.010835862034491849,
                -0.010986935411050393,
                -0.010867833621178918,
                -0.011210901407484456,
                -0.011776948783130315,
                -0.01168609532750951,
                -0.01141640308860457,
                -0.01156255733942801,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -1.0,
                0.2857812626743944,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                0.04131706605138506,
                0.011776466162172455,
                0.7279245708430995,
                -0.020793290714595694,
                -0.013221703633029006,
                -0.0010565180569324822,
                -0.014840490134229514,
                -0.00037345845886116647,
                0.009144059564304917,
                0.0008704844117426531,
                0.007839026905430906,
                0.005754216021006195,
                0.0028628271680461253,
                0.013252249086899079,
                0.009456868789196656,
                0.00843070406368904,
                0.011005013777991672,
                0.009087183331968843,
                0.009348817815212728,
                0.01163919739083623,
                0.010835862034491849,
                0.010986935411050393,
                0.010867833621178918,
                0.011210901407484456,
                0.011776948783130315,
                0.01168609532750951,
                0.01141640308860457,
                0.01156255733942801,
            ],
            Sense::Eq,
            -0.01767892975923315,
        );
        lp.add_row(
            vec![
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.9584082445597043,
                0.0,
                0.0,
                0.0,
                0.8927444566240129,
                -0.0,
                0.8556121071791996,
                0.01272768607894469,
                0.7723584107873438,
                0.6630696138524307,
                0.8611691550956146,
                0.7734653997827656,
                0.8350455026293029,
                0.8353230043760544,
                0.9102412639592646,
                0.8237915477619736,
                0.861968892737617,
                0.8556835481895566,
                0.8511902911754192,
                0.854653260221562,
                0.8473455896518983,
                0.8507945162562858,
                0.8618846546924926,
                0.852720172502499,
                0.8582812294318026,
                0.8571933183704334,
                0.8552814222293518,
                0.8543189211829493,
                0.8566258642011878,
                0.8522856199448603,
                0.8553138295261732,
                0.8548638988630212,
                0.8544436904191488,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -1.0,
                -0.0,
                -0.9584082445597043,
                -0.0,
                -0.0,
                -0.0,
                -0.8927444566240129,
                0.0,
                -0.8556121071791996,
                -0.01272768607894469,
                -0.7723584107873438,
                -0.6630696138524307,
                -0.8611691550956146,
                -0.7734653997827656,
                -0.8350455026293029,
                -0.8353230043760544,
                -0.9102412639592646,
                -0.8237915477619736,
                -0.861968892737617,
                -0.8556835481895566,
                -0.8511902911754192,
                -0.854653260221562,
                -0.8473455896518983,
                -0.8507945162562858,
                -0.8618846546924926,
                -0.852720172502499,
                -0.8582812294318026,
                -0.8571933183704334,
                -0.8552814222293518,
                -0.8543189211829493,
                -0.8566258642011878,
                -0.8522856199448603,
                -0.8553138295261732,
                -0.8548638988630212,
                -0.8544436904191488,
            ],
            Sense::Eq,
            1.2827471663132675,
        );
        lp.add_row(
            vec![
                0.0,
                0.0,
                -0.0,
                0.0,
                0.0,
                -0.0,
                0.0,
                1.0,
                -0.2854008352475264,
                0.0,
                0.0,
                -0.0,
                0.0,
                -0.8927282269440269,
                -0.25479055566266884,
                0.04274083973480966,
                -0.1360224835079846,
                -0.5159193582407507,
                -0.3008712058050578,
                -0.1579108808579606,
                -0.21350473156206654,
                -0.2305671693446419,
                -0.17835254263607142,
                -0.2795571806332078,
                -0.24583564920426676,
                -0.2694458428269837,
                -0.3235919790927706,
                -0.27564205239831274,
                -0.25852848262866207,
                -0.26318112829265344,
                -0.2531577129255353,
                -0.24154941210438152,
                -0.2594632378135326,
                -0.25102892291368917,
                -0.2591496232607496,
                -0.25416097560662615,
                -0.25458340696312937,
                -0.258340208629705,
                -0.25695257117863357,
                -0.25452247283521706,
                -0.25580042099015027,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -1.0,
                0.2854008352475264,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                0.8927282269440269,
                0.25479055566266884,
                -0.04274083973480966,
                0.1360224835079846,
                0.5159193582407507,
                0.3008712058050578,
                0.1579108808579606,
                0.21350473156206654,
                0.2305671693446419,
                0.17835254263607142,
                0.2795571806332078,
                0.24583564920426676,
                0.2694458428269837,
                0.3235919790927706,
                0.27564205239831274,
                0.25852848262866207,
                0.26318112829265344,
                0.2531577129255353,
                0.24154941210438152,
                0.2594632378135326,
                0.25102892291368917,
                0.2591496232607496,
                0.25416097560662615,
                0.25458340696312937,
                0.258340208629705,
                0.25695257117863357,
                0.25452247283521706,
                0.25580042099015027,
            ],
            Sense::Eq,
            -0.38198451938963685,
        );
        lp.add_row(
            vec![
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.9582948762798583,
                0.02578620917243509,
                -0.0,
                0.02471659271753287,
                -0.1354792553843894,
                -0.09174676166944803,
                0.058303605950953206,
                0.000656425721668537,
                0.22839478652831485,
                0.030982123625077344,
                -0.019893139581649375,
                0.0012132605037505188,
                0.011081715612422575,
                0.007261236974030488,
                0.05596268012261712,
                0.032577863679804565,
                0.025878429897216677,
                0.030999619219902474,
                0.021551427214924243,
                0.023715819560047157,
                0.02077868627854793,
                0.018915720911484434,
                0.020151403492839167,
                0.024918795571641884,
                0.025659832479102185,
                0.024130163666666996,
                0.02421616016561019,
                0.023233435995351503,
                0.02307027245150481,
                0.024140854903712126,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -0.0,
                -1.0,
                -0.0,
                -0.9582948762798583,
                -0.02578620917243509,
                0.0,
                -0.02471659271753287,
                0.1354792553843894,
                0.09174676166944803,
                -0.058303605950953206,
                -0.000656425721668537,
                -0.22839478652831485,
                -0.030982123625077344,
                0.019893139581649375,
                -0.0012132605037505188,
                -0.011081715612422575,
                -0.007261236974030488,
                -0.05596268012261712,
                -0.032577863679804565,
                -0.025878429897216677,
                -0.030999619219902474,
                -0.021551427214924243,
                -0.023715819560047157,
                -0.02077868627854793,
                -0.018915720911484434,
                -0.020151403492839167,
                -0.024918795571641884,
                -0.025659832479102185,
                -0.024130163666666996,
                -0.02421616016561019,
                -0.023233435995351503,
                -0.02307027245150481,
                -0.024140854903712126,
            ],
            Sense::Eq,
            0.03705112532536625,
        );
        lp.add_row(
            vec![
                0.0,
                0.0,
                -0.0,
                0.0,
                0.0,
                -0.0,
                0.0,
                0.0,
                -0.0,
                0.0,
                1.0,
                -0.28578126267439435,
                0.0,
                -0.02582316628211566,
                -0.007360291351357787,
                -0.4549528567769054,
                0.0161578124893749,
                -0.0453647073202058,
                -0.00022933891353544796,
                -0.046629134198092795,
                -0.007921520404537023,
                0.005490935672416678,
                -0.00023772608899601562,
                -0.0037606275296271736,
                -0.002070922652286694,
                -0.0176220654754894,
                -0.012384933771043088,
                -0.008346289497410262,
                -0.009458106133862191,
                -0.006666626103443524,
                -0.006965946785673185,
                -0.005885963082302855,
                -0.005718328707386547,
                -0.00590133521295195,
                -0.007550376188074079,
                -0.007633833098020079,
                -0.007171321265867381,
                -0.007340271527517768,
                -0.006979766853094126,
                -0.0068688159614049525,
                -0.007227206329304649,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -0.0,
                0.0,
                -0.0,
                -1.0,
                0.28578126267439435,
                -0.0,
                0.02582316628211566,
                0.007360291351357787,
                0.4549528567769054,
                -0.0161578124893749,
                0.0453647073202058,
                0.00022933891353544796,
                0.046629134198092795,
                0.007921520404537023,
                -0.005490935672416678,
                0.00023772608899601562,
                0.0037606275296271736,
                0.002070922652286694,
                0.0176220654754894,
                0.012384933771043088,
                0.008346289497410262,
                0.009458106133862191,
                0.006666626103443524,
                0.006965946785673185,
                0.005885963082302855,
                0.005718328707386547,
                0.00590133521295195,
                0.007550376188074079,
                0.007633833098020079,
                0.007171321265867381,
                0.007340271527517768,
                0.006979766853094126,
                0.0068688159614049525,
                0.007227206329304649,
            ],
            Sense::Eq,
            -0.011049331099520719,
        );
        let r = lp.solve();
        assert!(r.is_ok(), "{r:?}");
    }

    use super::*;

    #[test]
    fn small_lp_with_duals() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add_row(vec![1.0, 2.0], Sense::Le, 4.0);
        lp.add_row(vec![3.0, 1.0], Sense::Le, 6.0);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 1.6).abs() < 1e-9 && (s.x[1] - 1.2).abs() < 1e-9);
        assert!((s.objective + 2.8).abs() < 1e-9);
        let dual_obj = 4.0 * s.duals[0] + 6.0 * s.duals[1];
        assert!((dual_obj - s.objective).abs() < 1e-9);
    }

    #[test]
    fn free_and_boxed_variables() {
        // min t s.t. t >= x - 1, t >= -x + 3, x in [-10, 10], t free
        let mut lp = LinearProgram::new(vec![0.0, 1.0]);
        lp.set_bound(0, VarBound::Boxed(-10.0, 10.0));
        lp.set_bound(1, VarBound::Free);
        lp.add_row(vec![1.0, -1.0], Sense::Le, 1.0);
        lp.add_row(vec![-1.0, -1.0], Sense::Le, -3.0);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-9);
        assert!((s.objective - 1.0).abs() < 1e-9);
        let lam: f64 = s.duals.iter().map(|v| -v).sum();
        assert!((lam - 1.0).abs() < 1e-9);
        assert!(s.bound_duals[0].abs() < 1e-12);
    }

    #[test]
    fn equality_rows_and_infeasibility() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0, 0.0], Sense::Eq, 1.0);
        lp.add_row(vec![0.0, 1.0, 1.0], Sense::Eq, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);

        let mut bad = LinearProgram::new(vec![1.0]);
        bad.add_row(vec![1.0], Sense::Eq, -1.0);
        assert!(matches!(bad.solve(), Err(LpError::Infeasible(_))));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], Sense::Eq, 2.0);
        lp.add_row(vec![2.0, 2.0], Sense::Eq, 4.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.add_row(vec![-1.0], Sense::Le, 0.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }
}
