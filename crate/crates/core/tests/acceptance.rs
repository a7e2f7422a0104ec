//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the report lines always reach the console.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use netcov::bench::{desk_network, median, run_sim_study, StudyConfig};
use netcov::covariance::{cov_matrix_exponential, cov_matrix_pathsum, KernelSpec, PathOptions};
use netcov::estimator::{build_bins, build_w, fit_range, fit_replicate, lambda_rule, ridge_solve, PathCatalog};
use netcov::extremes::{excursion_sets, joint_exceedance};
use netcov::fields::{sample_gaussian, FieldEnsemble};
use netcov::markov::MarkovSolution;
use netcov::network::{Edge, Vertex};
use netcov::{DirectedNetwork, KernelKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn vertices(n: usize, rng: &mut ChaCha20Rng) -> Vec<Vertex> {
    (0..n).map(|id| Vertex { id, x: rng.random_range(0.0..100.0), y: rng.random_range(0.0..100.0) }).collect()
}

/// Random network with up to two out-edges per vertex. Acyclic networks only
/// point to higher indices; cyclic ones keep at least 10% sink mass per vertex
/// so no closed class forms.
fn random_network(rng: &mut ChaCha20Rng, cyclic: bool, lengths: (f64, f64)) -> DirectedNetwork {
    let n = rng.random_range(4..=20);
    let verts = vertices(n, rng);
    let mut edges = Vec::new();
    for a in 0..n {
        let candidates: Vec<usize> = if cyclic { (0..n).filter(|&b| b != a).collect() } else { (a + 1..n).collect() };
        if candidates.is_empty() {
            continue;
        }
        let k = rng.random_range(0..=2usize).min(candidates.len());
        let mut heads = Vec::new();
        while heads.len() < k {
            let b = candidates[rng.random_range(0..candidates.len())];
            if !heads.contains(&b) {
                heads.push(b);
            }
        }
        let budget = if cyclic { rng.random_range(0.3..0.9) } else { rng.random_range(0.5..=1.0) };
        let split = rng.random_range(0.2..0.8);
        for (i, &b) in heads.iter().enumerate() {
            let prob = if k == 1 { budget } else if i == 0 { budget * split } else { budget * (1.0 - split) };
            edges.push(Edge { tail: a, head: b, length: rng.random_range(lengths.0..lengths.1), prob });
        }
    }
    DirectedNetwork::with_implicit_sink(verts, edges).expect("valid random network")
}

fn is_symmetric_exact(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

fn disconnected_are_zero(m: &DMatrix<f64>, markov: &MarkovSolution) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || markov.reach.connected(i, j) || m[(i, j)] == 0.0))
}

fn diag_is_sill(m: &DMatrix<f64>, sill: f64) -> bool {
    (0..m.nrows()).all(|i| m[(i, i)] == sill)
}

/// Networks shared by criteria 1, 2 and 4.
struct Generated {
    markov: MarkovSolution,
    closed: DMatrix<f64>,
    sill: f64,
}

fn criterion_1(store: &mut Vec<Generated>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let mut worst_acyclic: f64 = 0.0;
    let mut worst_cyclic: f64 = 0.0;
    for k in 0..50 {
        let cyclic = k % 2 == 1;
        // Cyclic walks need strong decay per hop for the enumeration to converge.
        let (net, range) = if cyclic {
            (random_network(&mut rng, true, (2.0, 4.0)), 1.0)
        } else {
            (random_network(&mut rng, false, (5.0, 40.0)), rng.random_range(20.0..150.0))
        };
        let sill = rng.random_range(0.5..3.0);
        let markov = MarkovSolution::solve(&net).expect("transient chain");
        let closed = cov_matrix_exponential(&net, &markov, sill, range).expect("closed form");
        let kernel = KernelSpec::exponential(sill, range).unwrap();
        let opts = if cyclic {
            PathOptions { max_hops: Some(10_000), weight_floor: 1e-16 }
        } else {
            PathOptions { max_hops: Some(net.len() + 1), weight_floor: 0.0 }
        };
        let (oracle, _) = cov_matrix_pathsum(&net, &markov, &kernel, &opts).expect("path sum");
        let err = (&closed - &oracle).amax();
        if cyclic {
            worst_cyclic = worst_cyclic.max(err);
        } else {
            worst_acyclic = worst_acyclic.max(err);
        }
        store.push(Generated { markov, closed, sill });
    }
    let elapsed = start.elapsed();
    let pass = worst_acyclic <= 1e-10 && worst_cyclic <= 1e-8 && elapsed < Duration::from_secs(10);
    outcome(pass, format!("max |diff| acyclic {worst_acyclic:.2e}, cyclic {worst_cyclic:.2e}, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2(store: &[Generated], trees: &[(DMatrix<f64>, f64)]) -> Outcome {
    let bad = store.iter().filter(|g| !diag_is_sill(&g.closed, g.sill)).count()
        + trees.iter().filter(|(m, s)| !diag_is_sill(m, *s)).count();
    outcome(bad == 0, format!("{} matrices checked, {bad} with a diagonal entry != sill", store.len() + trees.len()))
}

/// Random binary tree: parent of vertex `i > 0` is an earlier vertex with
/// fewer than two children.
fn random_tree(rng: &mut ChaCha20Rng) -> (Vec<Vertex>, Vec<(usize, usize, f64)>) {
    let n = rng.random_range(3..=30);
    let mut children = vec![0usize; n];
    let mut links = Vec::new();
    for child in 1..n {
        let open: Vec<usize> = (0..child).filter(|&p| children[p] < 2).collect();
        let parent = open[rng.random_range(0..open.len())];
        children[parent] += 1;
        links.push((parent, child, rng.random_range(5.0..30.0)));
    }
    (vertices(n, rng), links)
}

/// Covariance of the classical stream model: unique path weights times the
/// kernel at the path length. `nu[child]` is the weight of the link from
/// `child` to its parent.
fn stream_covariance(n: usize, links: &[(usize, usize, f64)], nu: &[f64], sill: f64, range: f64) -> DMatrix<f64> {
    let mut parent = vec![None; n];
    for &(p, c, len) in links {
        parent[c] = Some((p, len));
    }
    let mut out = DMatrix::zeros(n, n);
    for x in 0..n {
        out[(x, x)] = sill;
        let (mut cur, mut len, mut w) = (x, 0.0, 1.0);
        while let Some((p, l)) = parent[cur] {
            len += l;
            w *= nu[cur].sqrt();
            out[(x, p)] = w * sill * (-len / range).exp();
            out[(p, x)] = out[(x, p)];
            cur = p;
        }
    }
    out
}

fn criterion_3(trees: &mut Vec<(DMatrix<f64>, f64)>, extra: &mut Vec<(DMatrix<f64>, MarkovSolution)>) -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (verts, links) = random_tree(&mut rng);
        let n = verts.len();
        let sill = rng.random_range(0.5..2.0);
        let range = rng.random_range(10.0..100.0);
        let mut kids = vec![0usize; n];
        for &(p, _, _) in &links {
            kids[p] += 1;
        }
        // Upstream weights: equal split among the links merging at the parent.
        let mut nu = vec![1.0; n];
        for &(p, c, _) in &links {
            nu[c] = 1.0 / kids[p] as f64;
        }
        let expected = stream_covariance(n, &links, &nu, sill, range);

        // Flow toward the root with unit probabilities.
        let up_edges = links.iter().map(|&(p, c, len)| Edge { tail: c, head: p, length: len, prob: 1.0 }).collect();
        // Flow away from the root, splitting by the stream weights.
        let down_edges = links.iter().map(|&(p, c, len)| Edge { tail: p, head: c, length: len, prob: nu[c] }).collect();
        let kernel = KernelSpec::exponential(sill, range).unwrap();
        for edges in [up_edges, down_edges] {
            let net = DirectedNetwork::with_implicit_sink(verts.clone(), edges).unwrap();
            let markov = MarkovSolution::solve(&net).unwrap();
            let closed = cov_matrix_exponential(&net, &markov, sill, range).unwrap();
            let opts = PathOptions { max_hops: Some(n + 1), weight_floor: 0.0 };
            let (paths, _) = cov_matrix_pathsum(&net, &markov, &kernel, &opts).unwrap();
            worst = worst.max((&closed - &expected).amax()).max((&paths - &expected).amax());
            trees.push((closed.clone(), sill));
            extra.push((closed, markov));
        }
    }
    outcome(worst <= 1e-12, format!("20 binary trees, both orientations, max |diff| {worst:.2e}"))
}

fn criterion_4(store: &[Generated], extra: &[(DMatrix<f64>, MarkovSolution)], desk: &(DMatrix<f64>, MarkovSolution)) -> Outcome {
    let mut checked = 0;
    let mut bad = 0;
    let all = store.iter().map(|g| (&g.closed, &g.markov)).chain(extra.iter().map(|(m, k)| (m, k))).chain([(&desk.0, &desk.1)]);
    for (m, markov) in all {
        checked += 1;
        if !is_symmetric_exact(m) || !disconnected_are_zero(m, markov) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{checked} matrices, {bad} asymmetric or nonzero on a disconnected pair"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(505);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..50 {
        let pairs = rng.random_range(5..200);
        let bins = rng.random_range(1..20);
        let sill = rng.random_range(0.1..10.0);
        let w = DMatrix::from_fn(pairs, bins, |_, _| if rng.random_bool(0.3) { rng.random_range(0.0..1.5) } else { 0.0 });
        // Right-hand sides shaped like sill minus semivariances.
        let rhs = DVector::from_fn(pairs, |_, _| sill - rng.random_range(0.0..3.0) * sill * rng.random_range(0.0..1.0f64).powi(2));
        let lambda = lambda_rule(&w, &rhs, sill).expect("lambda");
        let c = ridge_solve(&w, &rhs, lambda).expect("ridge");
        let norm = c.amax();
        tightest = tightest.min(sill - norm);
        if norm > sill {
            violations += 1;
        }
    }
    // Instances from real path weights and simulated fields with estimated sills.
    let net = desk_network().unwrap();
    let markov = MarkovSolution::solve(&net).unwrap();
    let all: Vec<usize> = (0..net.len()).collect();
    let catalog = PathCatalog::build(&net, &markov, &all, &PathOptions::default(), None).unwrap();
    let bins = build_bins(&catalog.lengths(), netcov::estimator::DEFAULT_BINS, None).unwrap();
    let w = build_w(&catalog.paths, &bins);
    for (k, range) in [30.0, 80.0, 125.0, 200.0, 400.0].into_iter().enumerate() {
        let cov = cov_matrix_exponential(&net, &markov, 1.0, range).unwrap();
        let ens = sample_gaussian(&vec![0.0; net.len()], &cov, 10, 5050 + k as u64).unwrap();
        for r in 0..ens.m() {
            let fit = fit_replicate(&ens.realization(r), &w, &catalog.pairs, &catalog.unconnected, None).unwrap();
            let norm = fit.c_hat.amax();
            tightest = tightest.min(fit.sill - norm);
            if norm > fit.sill {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("100 instances, {violations} with max |C| > sill, smallest margin {tightest:.3e}"))
}

struct SillStudy {
    mean_sill: f64,
    median_range: f64,
    true_range: f64,
    replicates: usize,
    elapsed: Duration,
}

fn sill_study() -> SillStudy {
    let start = Instant::now();
    let net = desk_network().unwrap();
    let markov = MarkovSolution::solve(&net).unwrap();
    let (sill, range, replicates) = (1.0, 125.0, 200);
    let cov = cov_matrix_exponential(&net, &markov, sill, range).unwrap();
    let ens = sample_gaussian(&vec![0.0; net.len()], &cov, replicates, 606).unwrap();
    let all: Vec<usize> = (0..net.len()).collect();
    let catalog = PathCatalog::build(&net, &markov, &all, &PathOptions::default(), None).unwrap();
    let bins = build_bins(&catalog.lengths(), netcov::estimator::DEFAULT_BINS, None).unwrap();
    let w = build_w(&catalog.paths, &bins);
    let mut sills = Vec::new();
    let mut ranges = Vec::new();
    for r in 0..replicates {
        let z = ens.realization(r);
        let fit = fit_replicate(&z, &w, &catalog.pairs, &catalog.unconnected, None).unwrap();
        let c: Vec<f64> = fit.c_hat.iter().copied().collect();
        let rf = fit_range(&c, &bins.h, KernelKind::Exponential, fit.sill).unwrap();
        sills.push(fit.sill);
        ranges.push(rf.theta_r);
    }
    SillStudy {
        mean_sill: sills.iter().sum::<f64>() / sills.len() as f64,
        median_range: median(ranges.into_iter()),
        true_range: range,
        replicates,
        elapsed: start.elapsed(),
    }
}

fn criterion_6(s: &SillStudy) -> Outcome {
    let pass = (0.95..=1.05).contains(&s.mean_sill) && s.elapsed < Duration::from_secs(120);
    outcome(pass, format!("{} replicates, mean sill {:.4}, {:.1}s", s.replicates, s.mean_sill, s.elapsed.as_secs_f64()))
}

fn criterion_7(s: &SillStudy) -> Outcome {
    outcome(s.median_range <= s.true_range, format!("median range {:.2} vs true {:.0} (soft)", s.median_range, s.true_range))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let net = desk_network().unwrap();
    let config = StudyConfig { ranges: vec![125.0], replicates: 50, seed: 808, ..StudyConfig::default() };
    let report = run_sim_study(&net, &config).expect("study");
    let s = &report.summaries[0];
    let elapsed = start.elapsed();
    let mse_ok = (s.mean_mse_euclid - config.sill).abs() <= 0.15 * config.sill;
    let pass = mse_ok
        && s.network_wins_mse >= 0.9
        && s.network_wins_frobenius >= 0.9
        && s.network_wins_kl >= 0.9
        && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "mean MSE euclid {:.3} network {:.3}; wins mse {:.0}% frob {:.0}% kl {:.0}%; {:.1}s",
            s.mean_mse_euclid,
            s.mean_mse_network,
            100.0 * s.network_wins_mse,
            100.0 * s.network_wins_frobenius,
            100.0 * s.network_wins_kl,
            elapsed.as_secs_f64()
        ),
    )
}

/// Mean visits from `start` and the frequency of returning to `start`, by
/// simulating the chain until absorption.
fn simulate_chain(net: &DirectedNetwork, start: usize, trials: usize, rng: &mut ChaCha20Rng) -> (Vec<(f64, f64)>, (f64, f64)) {
    let n = net.len();
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    let mut returns = 0usize;
    let mut visits = vec![0.0; n];
    for _ in 0..trials {
        visits.iter_mut().for_each(|v| *v = 0.0);
        let mut cur = start;
        visits[cur] += 1.0;
        let mut returned = false;
        loop {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut next = None;
            for e in net.out_edges(cur) {
                acc += e.prob;
                if u < acc {
                    next = Some(e.head);
                    break;
                }
            }
            match next {
                Some(b) => {
                    cur = b;
                    visits[cur] += 1.0;
                    returned |= cur == start;
                }
                None => break,
            }
        }
        returns += usize::from(returned);
        for y in 0..n {
            sum[y] += visits[y];
            sq[y] += visits[y] * visits[y];
        }
    }
    let t = trials as f64;
    let stats = (0..n)
        .map(|y| {
            let mean = sum[y] / t;
            let var = (sq[y] / t - mean * mean).max(0.0);
            (mean, (var / t).sqrt())
        })
        .collect();
    let p = returns as f64 / t;
    (stats, (p, (p * (1.0 - p) / t).sqrt()))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(909);
    let trials = 100_000;
    let mut checks = 0;
    let mut misses = 0;
    let mut worst_z: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(3..=6);
        let verts = vertices(n, &mut rng);
        let mut edges = Vec::new();
        for a in 0..n {
            let mut heads: Vec<usize> = (0..n).filter(|&b| b != a).collect();
            let k = rng.random_range(1..=2);
            let budget = rng.random_range(0.5..0.95);
            let split = rng.random_range(0.2..0.8);
            for i in 0..k {
                let b = heads.swap_remove(rng.random_range(0..heads.len()));
                let prob = if k == 1 { budget } else if i == 0 { budget * split } else { budget * (1.0 - split) };
                edges.push(Edge { tail: a, head: b, length: 1.0, prob });
            }
        }
        let net = DirectedNetwork::with_implicit_sink(verts, edges).unwrap();
        let markov = MarkovSolution::solve(&net).unwrap();
        let (visits, (ret, ret_se)) = simulate_chain(&net, 0, trials, &mut rng);
        for (y, &(mean, se)) in visits.iter().enumerate() {
            // Expected visits factor as hitting probability times visits per arrival.
            let hit = markov.g[(0, y)] / markov.g[(y, y)];
            let predicted = hit / markov.u[y];
            let z = (mean - predicted).abs() / se.max(1e-300);
            worst_z = worst_z.max(z);
            checks += 1;
            misses += usize::from(z > 3.0);
        }
        let z = ((1.0 - markov.u[0]) - ret).abs() / ret_se.max(1e-300);
        worst_z = worst_z.max(z);
        checks += 1;
        misses += usize::from(z > 3.0);
    }
    let cycle = DirectedNetwork::with_implicit_sink(
        vec![Vertex { id: 0, x: 0.0, y: 0.0 }, Vertex { id: 1, x: 1.0, y: 0.0 }],
        vec![Edge { tail: 0, head: 1, length: 1.0, prob: 0.9 }, Edge { tail: 1, head: 0, length: 1.0, prob: 0.5 }],
    )
    .unwrap();
    let sol = MarkovSolution::solve(&cycle).unwrap();
    let pair = sol.pair(&cycle, 0, 1).unwrap();
    let pair_ok = (pair - 0.1).abs() <= 1e-12;
    outcome(
        misses == 0 && pair_ok,
        format!("{checks} Monte Carlo checks, {misses} beyond 3 sigma (worst {worst_z:.2}); two-state pair non-return {pair:.15}"),
    )
}

fn criterion_10() -> Outcome {
    // Hand-counted example.
    let hand = FieldEnsemble {
        values: DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        mean: vec![0.0; 2],
        seed: 0,
    };
    let res = joint_exceedance(&hand, &[[0.0, 0.0], [1.0, 0.0]], [0.0, 0.0], &[1.0], 0.5).unwrap();
    let hand_ok = res[0].p_union == 0.75 && res[0].p_intersection == 0.25;

    // Synthetic temperature-like ensemble on the desk network.
    let net = desk_network().unwrap();
    let markov = MarkovSolution::solve(&net).unwrap();
    let cov = cov_matrix_exponential(&net, &markov, 1.0, 125.0).unwrap();
    // West-to-east ramp so each threshold cuts the domain somewhere different.
    let mean: Vec<f64> = net.vertices().iter().map(|v| 20.0 + 14.0 * v.x / 300.0).collect();
    let ens = sample_gaussian(&mean, &cov, 2000, 1010).unwrap();
    let alpha = 0.1;
    let mut containment_ok = true;
    let mut sets = Vec::new();
    for t in [25.0, 27.0, 30.0] {
        let r = excursion_sets(&ens, t, alpha).unwrap();
        containment_ok &= r.inner_containment >= 1.0 - alpha && r.outer_containment >= 1.0 - alpha;
        sets.push(r);
    }
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|v| b.contains(v));
    let monotone = sets.windows(2).all(|w| subset(&w[1].inner, &w[0].inner) && subset(&w[1].outer, &w[0].outer));
    let sizes: Vec<String> = sets.iter().map(|s| format!("{}/{}", s.inner.len(), s.outer.len())).collect();
    outcome(
        hand_ok && containment_ok && monotone,
        format!(
            "hand example {}/{}; containment >= {:.2}: {containment_ok}; nested inner/outer sizes at 25,27,30: {}",
            res[0].p_union,
            res[0].p_intersection,
            1.0 - alpha,
            sizes.join(", ")
        ),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_netcov")).args(args).output().map(|o| o.status.success()).unwrap_or(false)
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    matches!((fs::read(a), fs::read(b)), (Ok(x), Ok(y)) if x == y)
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |path: &Path| path.to_str().unwrap().to_string();
    let grid = p("grid.csv");
    fs::write(&grid, netcov::io::write_grid(&netcov::bench::desk_grid(netcov::bench::DESK_SPACING))).unwrap();
    let net = p("net.json");
    if !run_cli(&["build-net", "--grid", &s(&grid), "--out", &s(&net)]) {
        return outcome(false, "build-net failed");
    }
    let params = p("params.json");
    fs::write(&params, r#"{"kernel":"exponential","theta_s":1.0,"theta_r":125.0}"#).unwrap();
    let mut failures = Vec::new();
    for run in ["a", "b"] {
        let ens = s(&p(&format!("ens_{run}.bin")));
        let ok = run_cli(&["simulate", "--net", &s(&net), "--params", &s(&params), "--m", "20", "--seed", "7", "--out", &ens])
            && run_cli(&["--threads", if run == "a" { "1" } else { "4" }, "estimate", "--net", &s(&net), "--fields", &ens, "--out", &s(&p(&format!("fit_{run}.json")))])
            && run_cli(&["extremes", "--net", &s(&net), "--ensemble", &ens, "--threshold", "0.5", "--alpha", "0.1", "--center", "100,100", "--out", &s(&p(&format!("ext_{run}.json"))), "--out-csv", &s(&p(&format!("ext_{run}.csv")))])
            && run_cli(&["bench", "--seed", "3", "--replicates", "2", "--ranges", "125", "--out", &s(&p(&format!("bench_{run}.csv"))), "--out-json", &s(&p(&format!("bench_{run}.json")))]);
        if !ok {
            failures.push(format!("run {run} failed"));
        }
    }
    let artifacts = ["ens_{}.bin", "ens_{}.bin.json", "fit_{}.json", "ext_{}.json", "ext_{}.csv", "bench_{}.csv", "bench_{}.json"];
    for a in artifacts {
        if !same_bytes(&p(&a.replace("{}", "a")), &p(&a.replace("{}", "b"))) {
            failures.push(format!("{} differs", a.replace("_{}", "")));
        }
    }
    let pass = failures.is_empty();
    let detail = if pass { format!("{} artifacts byte-identical across reruns", artifacts.len()) } else { failures.join("; ") };
    outcome(pass, detail)
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome, bool)> = Vec::new();
    let mut store = Vec::new();
    let mut trees = Vec::new();
    let mut tree_nets = Vec::new();
    results.push((1, "closed form matches path-sum oracle", criterion_1(&mut store), true));
    let c3 = criterion_3(&mut trees, &mut tree_nets);
    results.push((2, "diagonal equals the sill", criterion_2(&store, &trees), true));
    results.push((3, "stream-model equivalence on trees", c3, true));
    let desk = {
        let net = desk_network().unwrap();
        let markov = MarkovSolution::solve(&net).unwrap();
        (cov_matrix_exponential(&net, &markov, 1.0, 125.0).unwrap(), markov)
    };
    results.push((4, "symmetry and zero covariance of disconnected pairs", criterion_4(&store, &tree_nets, &desk), true));
    results.push((5, "penalty keeps binned covariance below the sill", criterion_5(), true));
    let study = sill_study();
    results.push((6, "sill recovery", criterion_6(&study), true));
    results.push((7, "range bias direction", criterion_7(&study), false));
    results.push((8, "simulation study contrast", criterion_8(), true));
    results.push((9, "Markov hitting decomposition", criterion_9(), true));
    results.push((10, "joint exceedance and excursion sets", criterion_10(), true));
    results.push((11, "determinism of stochastic commands", criterion_11(), true));

    let mut hard_failures = 0;
    for (id, name, o, hard) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let soft = if *hard { "" } else { " [soft]" };
        println!("criterion {id:>2}: {tag}{soft} {name}: {}", o.detail);
        if !o.pass && *hard {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        eprintln!("{hard_failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
