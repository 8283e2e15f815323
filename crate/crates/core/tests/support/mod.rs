//! Shared test oracles, independent of the library's solve paths.
//!
//! Each integration-test target compiles its own copy, so helpers unused by
//! one target are expected.
#![allow(dead_code)]

use gridclear::grid::{Bus, Line, Network};
use gridclear::orderbook::{BidBlock, EnergyClass, Generator, Load, OfferBlock, OrderBook};

/// Description of a box-bounded maximization LP for the brute-force oracle.
pub struct DenseLp {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Vec<f64>,
    /// Rows as (coefficients, lower, upper); equality when lower == upper.
    pub rows: Vec<(Vec<f64>, f64, f64)>,
}

/// Brute-force optimum by basic-solution enumeration.
///
/// Converts the rows to equalities with slack columns, then enumerates every
/// choice of basis columns together with every lower/upper assignment of the
/// nonbasic columns, solves the square system by Gaussian elimination, keeps
/// the feasible candidates, and returns the best objective. Exponential, so
/// only usable for tiny instances, but entirely independent of the simplex.
pub fn brute_force_max(lp: &DenseLp) -> Option<f64> {
    let m = lp.rows.len();
    let nstruct = lp.lower.len();
    let n = nstruct + m;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..nstruct {
        cols.push(lp.rows.iter().map(|(a, _, _)| a[j]).collect());
    }
    for r in 0..m {
        let mut col = vec![0.0; m];
        col[r] = -1.0;
        cols.push(col);
        lower.push(lp.rows[r].1);
        upper.push(lp.rows[r].2);
    }
    let obj = |x: &[f64]| -> f64 {
        (0..nstruct).map(|j| lp.objective[j] * x[j]).sum()
    };

    let mut best: Option<f64> = None;
    let mut basis = vec![0usize; m];
    enumerate_bases(n, m, 0, 0, &mut basis, &mut |basis: &[usize]| {
        let nonbasic: Vec<usize> = (0..n).filter(|j| !basis.contains(j)).collect();
        // Each nonbasic column sits at one of its finite bounds (or 0 when
        // free); enumerate the assignments.
        let choices: Vec<Vec<f64>> = nonbasic
            .iter()
            .map(|&j| {
                let mut v = Vec::new();
                if lower[j].is_finite() {
                    v.push(lower[j]);
                }
                if upper[j].is_finite() && upper[j] != lower[j] {
                    v.push(upper[j]);
                }
                if v.is_empty() {
                    v.push(0.0);
                }
                v
            })
            .collect();
        let mut pick = vec![0usize; nonbasic.len()];
        loop {
            let mut x = vec![0.0; n];
            for (k, &j) in nonbasic.iter().enumerate() {
                x[j] = choices[k][pick[k]];
            }
            // Solve B xB = -N xN.
            let mut mat = vec![0.0; m * m];
            let mut rhs = vec![0.0; m];
            for (pos, &j) in basis.iter().enumerate() {
                for r in 0..m {
                    mat[r * m + pos] = cols[j][r];
                }
            }
            for &j in &nonbasic {
                if x[j] != 0.0 {
                    for r in 0..m {
                        rhs[r] -= cols[j][r] * x[j];
                    }
                }
            }
            if let Some(xb) = gauss_solve(&mut mat, &mut rhs, m) {
                let mut ok = true;
                for (pos, &j) in basis.iter().enumerate() {
                    if xb[pos] < lower[j] - 1e-9 || xb[pos] > upper[j] + 1e-9 {
                        ok = false;
                        break;
                    }
                    x[j] = xb[pos];
                }
                if ok {
                    let v = obj(&x);
                    if best.is_none_or(|b| v > b) {
                        best = Some(v);
                    }
                }
            }
            // Advance the bound assignment odometer.
            let mut k = 0;
            loop {
                if k == nonbasic.len() {
                    return;
                }
                pick[k] += 1;
                if pick[k] < choices[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    });
    best
}

fn enumerate_bases(
    n: usize,
    m: usize,
    next: usize,
    depth: usize,
    basis: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == m {
        f(basis);
        return;
    }
    for j in next..n {
        basis[depth] = j;
        enumerate_bases(n, m, j + 1, depth + 1, basis, f);
    }
}

fn gauss_solve(mat: &mut [f64], rhs: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for col in 0..m {
        let mut piv = col;
        let mut best = mat[col * m + col].abs();
        for r in col + 1..m {
            let c = mat[r * m + col].abs();
            if c > best {
                best = c;
                piv = r;
            }
        }
        if best < 1e-10 {
            return None;
        }
        if piv != col {
            for k in 0..m {
                mat.swap(col * m + k, piv * m + k);
            }
            rhs.swap(col, piv);
        }
        let d = mat[col * m + col];
        for k in 0..m {
            mat[col * m + k] /= d;
        }
        rhs[col] /= d;
        for r in 0..m {
            if r != col {
                let f = mat[r * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        mat[r * m + k] -= f * mat[col * m + k];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some(rhs.to_vec())
}

/// The three-bus instance from the bundled cases: a free green generator and
/// a costly black generator squeezed by a 1 MW tie line.
pub fn three_bus() -> (Network, OrderBook) {
    let buses = vec![
        Bus::new("G"),
        Bus::new("B"),
        Bus::new("L"),
    ];
    let lines = vec![
        Line::new("G", "B", 10.0, -1.0, 1.0),
        Line::new("G", "L", 10.0, f64::NEG_INFINITY, f64::INFINITY),
        Line::new("B", "L", 10.0, f64::NEG_INFINITY, f64::INFINITY),
    ];
    let net = Network::new(buses, lines, "L");
    let ob = OrderBook::new(
        vec![
            Generator::new("green1", "G", EnergyClass::Green, vec![OfferBlock::new(4.0, 0.0)], 12.0),
            Generator::new("black1", "B", EnergyClass::Black, vec![OfferBlock::new(4.0, 10.0)], 1000.0),
        ],
        vec![Load::new("load1", "L", vec![BidBlock::new(8.0, 4.0)], 3.0)],
    );
    (net, ob)
}

/// The four-bus congestion instance: black at B with a cheap direct path,
/// green behind the constrained corridor.
pub fn fig1() -> (Network, OrderBook) {
    let buses = vec![Bus::new("B"), Bus::new("M"), Bus::new("G"), Bus::new("L")];
    let lines = vec![
        Line::new("B", "M", 25.0, f64::NEG_INFINITY, f64::INFINITY),
        Line::new("M", "L", 20.0, -10.0, 10.0),
        Line::new("B", "L", 100.0, f64::NEG_INFINITY, f64::INFINITY),
        Line::new("G", "M", 100.0, f64::NEG_INFINITY, f64::INFINITY),
    ];
    let net = Network::new(buses, lines, "L");
    let ob = OrderBook::new(
        vec![
            Generator::new("green1", "G", EnergyClass::Green, vec![OfferBlock::new(20.0, 0.0)], 12.0),
            Generator::new("black1", "B", EnergyClass::Black, vec![OfferBlock::new(100.0, 10.0)], 500.0),
        ],
        vec![Load::new("load1", "L", vec![BidBlock::new(150.0, 12.0)], 0.0)],
    );
    (net, ob)
}
