#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use orthomg::async_mg::{Role, TraceEvent, TraceRecord};
use orthomg::sparse::CsrMatrix;
use orthomg::{build_hierarchy, Multigrid, ProblemSpec, SmootherConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dense {
    (0..rows).map(|_| random_vec(rng, cols)).collect()
}

/// `B Bᵀ + n I` for a random `B`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let b = random_dense(rng, n, n);
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = (0..n).map(|k| b[i][k] * b[j][k]).sum::<f64>();
        }
        m[i][i] += n as f64;
    }
    m
}

pub fn random_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Dense {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(density) { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect()
        })
        .collect()
}

pub fn to_csr(m: &Dense) -> CsrMatrix {
    let cols = m.first().map_or(0, Vec::len);
    let triplets = m
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, v)| (i, j, *v)));
    CsrMatrix::from_triplets(m.len(), cols, triplets).unwrap()
}

/// Read every entry through `get`, not through the library's own dense conversion.
pub fn from_csr(a: &CsrMatrix) -> Dense {
    (0..a.n_rows())
        .map(|i| (0..a.n_cols()).map(|j| a.get(i, j)).collect())
        .collect()
}

pub fn matvec(m: &Dense, x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Gaussian elimination with partial pivoting on a copy.
pub fn dense_solve(m: &Dense, b: &[f64]) -> Vec<f64> {
    let n = m.len();
    let mut a: Dense = m.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(*bi);
        r
    }).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..=n {
                a[i][j] -= l * a[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    x
}

pub fn dense_inverse(m: &Dense) -> Dense {
    let n = m.len();
    let cols: Dense = (0..n).map(|j| dense_solve(m, &identity(n)[j])).collect();
    transpose(&cols)
}

/// `argmin_c ‖b − M c‖₂` by Householder QR; `columns` are the columns of `M`.
pub fn least_squares(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = columns.len();
    let n = b.len();
    let mut a: Dense = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let mut rhs = b.to_vec();
    for j in 0..k {
        let norm_x = (j..n).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        let alpha = if a[j][j] > 0.0 { -norm_x } else { norm_x };
        let mut v: Vec<f64> = (j..n).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..k {
            let s: f64 = (j..n).map(|i| v[i - j] * a[i][c]).sum::<f64>() * 2.0 / vnorm2;
            for i in j..n {
                a[i][c] -= s * v[i - j];
            }
        }
        let s: f64 = (j..n).map(|i| v[i - j] * rhs[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in j..n {
            rhs[i] -= s * v[i - j];
        }
    }
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * c[j]).sum();
        c[i] = (rhs[i] - s) / a[i][i];
    }
    c
}

/// 1D Dirichlet Laplacian `tridiag(-1, 2, -1)`.
pub fn laplacian_1d(n: usize) -> Dense {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match i.abs_diff(j) {
                    0 => 2.0,
                    1 => -1.0,
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Jump-coefficient benchmark (`r = 0.7 L`, `k_outer / k_inner = 1000`, `f = 1`).
pub fn benchmark_spec(n: usize) -> ProblemSpec {
    ProblemSpec {
        cells_per_axis: n,
        ..ProblemSpec::default()
    }
}

pub fn benchmark(n: usize, min_coarse_dofs: usize, smoother: SmootherConfig) -> (Multigrid, Vec<f64>) {
    let (h, b) = build_hierarchy(&benchmark_spec(n), min_coarse_dofs).unwrap();
    (Multigrid::new(h, &smoother).unwrap(), b)
}

/// Checks a protocol trace against the exchange rules and returns the number of
/// level-boundary invocations found.
///
/// Events of one level are split into invocations at each `terminate`. Within an
/// invocation ending in cycle `C`, every cycle `0..=C` has exactly one
/// restriction, prolongation, `smoother_done`, `coarse_done` and
/// `coarse_correction`, at least one sweep, and every cycle `1..=C` is opened by
/// exactly one `updated_residual` that precedes that cycle's restriction.
pub fn check_protocol(records: &[TraceRecord]) -> Result<usize, String> {
    let levels: BTreeSet<usize> = records.iter().map(|r| r.level).collect();
    let mut invocations = 0;
    for level in levels {
        let mut segment: Vec<(usize, &TraceRecord)> = Vec::new();
        for (pos, rec) in records.iter().enumerate().filter(|(_, r)| r.level == level) {
            segment.push((pos, rec));
            if rec.event == TraceEvent::Sent("terminate") {
                check_invocation(level, &segment)?;
                invocations += 1;
                segment.clear();
            }
        }
        if !segment.is_empty() {
            return Err(format!("level {level}: {} events after the last terminate", segment.len()));
        }
    }
    Ok(invocations)
}

fn check_invocation(level: usize, events: &[(usize, &TraceRecord)]) -> Result<(), String> {
    let last = events.last().unwrap().1;
    let final_cycle = last.cycle;
    let mut seen: HashMap<(&'static str, usize), Vec<usize>> = HashMap::new();
    for (pos, rec) in events {
        if rec.cycle > final_cycle {
            return Err(format!("level {level}: {} in cycle {} after terminate in {final_cycle}", rec.event.label(), rec.cycle));
        }
        let expected_role = match rec.event {
            TraceEvent::Sweep | TraceEvent::Sent("smoother_done" | "updated_residual" | "terminate") => Some(Role::Smoother),
            TraceEvent::Restrict | TraceEvent::Sent("coarse_done" | "coarse_correction") => Some(Role::Coarse),
            _ => None,
        };
        if expected_role.is_some_and(|role| role != rec.role) {
            return Err(format!("level {level}: {} recorded by {}", rec.event.label(), rec.role));
        }
        seen.entry((rec.event.label(), rec.cycle)).or_default().push(*pos);
    }
    let count = |label: &'static str, c: usize| seen.get(&(label, c)).map_or(0, Vec::len);
    let first = |label: &'static str, c: usize| seen.get(&(label, c)).map(|v| v[0]);
    for c in 0..=final_cycle {
        for label in ["restrict", "prolong", "smoother_done", "coarse_done", "coarse_correction"] {
            if count(label, c) != 1 {
                return Err(format!("level {level} cycle {c}: {} {label} events", count(label, c)));
            }
        }
        if count("sweep", c) == 0 {
            return Err(format!("level {level} cycle {c}: no sweep"));
        }
        let expected_updates = usize::from(c > 0);
        if count("updated_residual", c) != expected_updates {
            return Err(format!("level {level} cycle {c}: {} updated_residual", count("updated_residual", c)));
        }
        if c > 0 && first("updated_residual", c) > first("restrict", c) {
            return Err(format!("level {level} cycle {c}: restriction before the residual handover"));
        }
        let closing = if c == final_cycle { first("terminate", c) } else { first("updated_residual", c + 1) };
        if first("coarse_correction", c) > closing {
            return Err(format!("level {level} cycle {c}: exchange closed before the correction was sent"));
        }
    }
    if count("terminate", final_cycle) != 1 {
        return Err(format!("level {level}: {} terminate messages", count("terminate", final_cycle)));
    }
    Ok(())
}
