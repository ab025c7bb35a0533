//! Checks against quantities computed here from scratch, without the
//! library's own linear algebra or quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twowell::gaussfield::{log_partition, PinnedPrecision};
use twowell::spinwave::{constants_i_j, finite_free_energy, QuadratureSpec};
use twowell::{pattern_coupling, CouplingConfig, ModelParams, PatternId, TorusGeometry};

/// Weighted Laplacian of the torus with site 0 removed, dense.
fn reduced_laplacian(g: &TorusGeometry, kappa: &[f64]) -> Vec<Vec<f64>> {
    let n = g.num_sites();
    let mut a = vec![vec![0.0; n]; n];
    for (b, &k) in kappa.iter().enumerate() {
        let (t, h) = g.endpoints(b);
        a[t][t] += k;
        a[h][h] += k;
        a[t][h] -= k;
        a[h][t] -= k;
    }
    a.into_iter().skip(1).map(|row| row[1..].to_vec()).collect()
}

/// log |det| by Gaussian elimination with partial pivoting.
fn log_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        acc += d.abs().ln();
        for r in c + 1..n {
            let f = a[r][c] / d;
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    acc
}

fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                for k in 0..2 * n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    if parent[x] != x {
        let r = find(parent, parent[x]);
        parent[x] = r;
    }
    parent[x]
}

/// Sum over spanning trees of the product of bond weights (matrix-tree by brute force).
fn spanning_tree_sum(g: &TorusGeometry, kappa: &[f64]) -> (usize, f64) {
    let (n, nb) = (g.num_sites(), g.num_bonds());
    let (mut count, mut total) = (0, 0.0);
    for mask in 0usize..(1 << nb) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        let mut ok = true;
        for b in (0..nb).filter(|b| mask >> b & 1 == 1) {
            let (t, h) = g.endpoints(b);
            let (rt, rh) = (find(&mut parent, t), find(&mut parent, h));
            if rt == rh {
                ok = false;
                break;
            }
            parent[rt] = rh;
        }
        if ok {
            count += 1;
            total += (0..nb).filter(|b| mask >> b & 1 == 1).map(|b| kappa[b]).product::<f64>();
        }
    }
    (count, total)
}

#[test]
fn matrix_tree_at_l2() {
    let g = TorusGeometry::new(2).unwrap();
    let (count, _) = spanning_tree_sum(&g, &[1.0; 8]);
    assert_eq!(count, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let k: Vec<f64> = (0..8).map(|_| rng.random_range(0.01..100.0)).collect();
        let (_, trees) = spanning_tree_sum(&g, &k);
        let prec = PinnedPrecision::new(&g, &CouplingConfig::new(k.clone()).unwrap()).unwrap();
        assert!((prec.log_det() - trees.ln()).abs() < 1e-12 * trees.ln().abs().max(1.0));
    }
}

#[test]
fn pinned_log_partition_matches_dense_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for l in [2, 4, 6, 8] {
        let g = TorusGeometry::new(l).unwrap();
        let k: Vec<f64> = (0..g.num_bonds()).map(|_| if rng.random_bool(0.5) { 100.0 } else { 0.01 }).collect();
        let want = 0.5 * (g.num_sites() - 1) as f64 * std::f64::consts::TAU.ln()
            - 0.5 * log_det(reduced_laplacian(&g, &k));
        let got = log_partition(&CouplingConfig::new(k).unwrap(), &g).unwrap();
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "L={l}: {got} vs {want}");
    }
}

#[test]
fn finite_free_energy_against_dense_oracle() {
    for l in [2, 4, 8] {
        let g = TorusGeometry::new(l).unwrap();
        for (p, ko, kd) in [(0.3, 100.0, 0.01), (0.7, 2.0, 0.5), (0.5, 3.0, 7.0)] {
            let m = ModelParams::new(p, ko, kd).unwrap();
            for pat in PatternId::ALL {
                let k = pattern_coupling(pat, &g, &m);
                let n_o = k.count_equal(ko) as f64;
                let n_d = g.num_bonds() as f64 - n_o;
                let log_z = -0.5 * log_det(reduced_laplacian(&g, k.values()))
                    + n_o * p.ln()
                    + n_d * (1.0f64 - p).ln();
                let want = -log_z / g.num_sites() as f64;
                let got = finite_free_energy(pat, &m, l).unwrap().value;
                assert!((got - want).abs() < 1e-9, "{pat} L={l}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn trace_identity_for_bond_energies() {
    // sum_b kappa_b Var(eta_b) = N - 1 for any coupling.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g = TorusGeometry::new(4).unwrap();
    let k: Vec<f64> = (0..g.num_bonds()).map(|_| rng.random_range(0.1..10.0)).collect();
    let cov = inverse(&reduced_laplacian(&g, &k));
    let var = |b: usize| {
        let (t, h) = g.endpoints(b);
        let c = |i: usize, j: usize| if i == 0 || j == 0 { 0.0 } else { cov[i - 1][j - 1] };
        c(h, h) + c(t, t) - 2.0 * c(h, t)
    };
    let total: f64 = (0..g.num_bonds()).map(|b| k[b] * var(b)).sum();
    assert!((total - 15.0).abs() < 1e-10);
    let prec = PinnedPrecision::new(&g, &CouplingConfig::new(k.clone()).unwrap()).unwrap();
    for b in [0, 7, 31] {
        assert!((prec.bond_variance(&g, b) - var(b)).abs() < 1e-12);
    }
}

/// Catalan's constant from the rapidly converging central-binomial series.
fn catalan() -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0; // C(2n, n)
    for n in 0..40 {
        if n > 0 {
            binom *= (2 * n) as f64 * (2 * n - 1) as f64 / (n * n) as f64;
        }
        sum += 1.0 / ((2 * n + 1) as f64).powi(2) / binom;
    }
    std::f64::consts::PI / 8.0 * (2.0 + 3f64.sqrt()).ln() + 3.0 / 8.0 * sum
}

#[test]
fn laplacian_constant_is_two_catalan_over_pi() {
    let g = catalan();
    assert!((g - 0.915_965_594_177_219).abs() < 1e-15);
    let c = constants_i_j::<f64>(&QuadratureSpec::fixed(1024)).unwrap();
    assert!((c.i.value - 2.0 * g / std::f64::consts::PI).abs() < 1e-9, "{}", c.i.value);
}

#[test]
fn energy_per_bond_sequence() {
    for (l, want) in [(2usize, 3.0 / 16.0), (8, 63.0 / 256.0)] {
        let g = TorusGeometry::new(l).unwrap();
        assert_eq!(twowell::gaussfield::energy_per_bond(&g), want);
    }
}
