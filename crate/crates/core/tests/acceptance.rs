//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::collections::HashMap;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use knn_nmi::harness::{
    log_uniform_radii, run_sweep, stability_profile, summarize, ExperimentConfig, Family, Status,
};
use knn_nmi::scaling::{ln_v_baseline, ln_v_proposed};
use knn_nmi::truth::{student_t_c, student_t_marginal_entropy};
use knn_nmi::{
    compute_knn_radii, estimate, gaussian_truth, normalize, scale_radii, Backend, Dataset,
    RadiusSet,
};

const ORACLE: &str = include_str!("oracle/oracle_output.txt");

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gaussian_config(
    dims: &[usize],
    rho: &[f64],
    n: usize,
    reps: usize,
    backends: &[Backend],
) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Family::Gaussian);
    c.dims = dims.to_vec();
    c.rho_grid = rho.to_vec();
    c.n = n;
    c.repetitions = reps;
    c.backends = backends.to_vec();
    c
}

fn backend_equivalence() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for i in 0..100u64 {
        let n = [10, 100, 1000][i as usize % 3];
        let eps = log_uniform_radii(n, 0.1, 10.0, rng.random()).unwrap();
        for d in [1, 2, 8, 32, 64] {
            let base = ln_v_baseline(&eps, d).unwrap();
            let prop = ln_v_proposed(&eps, d).unwrap();
            if !base.finite {
                return outcome(false, format!("baseline not finite at N={n}, D={d}"));
            }
            worst = worst.max((base.ln_v - prop.ln_v).abs() / prop.ln_v.abs().max(1.0));
            compared += 1;
        }
    }
    outcome(
        worst <= 1e-10,
        format!("{compared} comparisons, worst scaled difference {worst:.2e} (limit 1e-10)"),
    )
}

fn overflow_reproduction() -> Outcome {
    let c = gaussian_config(
        &[512],
        &[0.5],
        1000,
        10,
        &[Backend::Baseline, Backend::Proposed],
    );
    let recs = match run_sweep(&c) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let base: Vec<_> = recs
        .iter()
        .filter(|r| r.backend == Backend::Baseline)
        .collect();
    let prop: Vec<_> = recs
        .iter()
        .filter(|r| r.backend == Backend::Proposed)
        .collect();
    let overflow = base.iter().filter(|r| r.status == Status::Overflow).count();
    let ok = prop
        .iter()
        .filter(|r| r.status == Status::Ok && r.nmi.is_some_and(f64::is_finite))
        .count();
    outcome(
        base.len() == 10 && prop.len() == 10 && overflow == 10 && ok == 10,
        format!(
            "d=512 N=1000: baseline overflow {overflow}/10, proposed ok with finite NMI {ok}/10"
        ),
    )
}

fn stability_shape() -> Outcome {
    let dims: Vec<usize> = (1..=2048).map(|i| 2 * i).collect();
    let rows = stability_profile(&[1.0, 2.0], &dims).unwrap();
    let ln_v = |b: Backend, d: usize| {
        rows.iter()
            .find(|r| r.backend == b && r.d_joint == d)
            .unwrap()
    };
    let mut problems = Vec::new();
    let mut prev = f64::INFINITY;
    for &d in &dims {
        let base = ln_v(Backend::Baseline, d);
        let prop = ln_v(Backend::Proposed, d);
        let dom = ln_v(Backend::DominantTerm, d);
        if d >= 1024 && base.finite {
            problems.push(format!("baseline finite at D={d}"));
        }
        if !prop.finite {
            problems.push(format!("proposed not finite at D={d}"));
            continue;
        }
        if d >= 64 {
            let gap = (prop.ln_v.unwrap() - dom.ln_v.unwrap()).abs();
            if gap >= prev {
                problems.push(format!("gap not decreasing at D={d}"));
            }
            prev = gap;
        }
    }
    let far = stability_profile(&[1.0, 2.0], &[1_000_000]).unwrap();
    let get = |b: Backend| far.iter().find(|r| r.backend == b).unwrap().ln_v.unwrap();
    let far_gap = (get(Backend::Proposed) - get(Backend::DominantTerm)).abs();
    if far_gap > 1e-5 {
        problems.push(format!("gap {far_gap:.2e} at D=1e6"));
    }
    let first_bad = dims.iter().find(|&&d| !ln_v(Backend::Baseline, d).finite);
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("baseline first non-finite at D={first_bad:?}, gap at D=1e6 {far_gap:.2e}")
        } else {
            problems.join("; ")
        },
    )
}

fn gaussian_accuracy() -> Outcome {
    let c = gaussian_config(
        &[1],
        &[0.0, 0.3, 0.6, 0.9],
        10_000,
        10,
        &[Backend::Proposed],
    );
    let rows = summarize(&run_sweep(&c).unwrap());
    let mut pass = true;
    let mut parts = Vec::new();
    for row in rows {
        let rho = row.rho.unwrap();
        let truth = gaussian_truth(1, rho).unwrap().nmi_true.unwrap();
        let mean = row.mean_nmi.unwrap_or(f64::NAN);
        let ok = row.n_ok == 10 && (mean - truth).abs() <= 0.1;
        pass &= ok;
        parts.push(format!(
            "rho={rho}: {mean:.4} vs {truth:.4}{}",
            if ok { "" } else { " (miss)" }
        ));
    }
    outcome(pass, parts.join(", "))
}

fn independence_null() -> Outcome {
    let mut c = gaussian_config(&[1, 4], &[0.9], 10_000, 10, &[Backend::Proposed]);
    c.shuffle_y = true;
    let rows = summarize(&run_sweep(&c).unwrap());
    let mut pass = true;
    let mut parts = Vec::new();
    for row in rows {
        let mean = row.mean_nmi.unwrap_or(f64::NAN);
        pass &= row.n_ok == 10 && mean.abs() <= 0.05;
        parts.push(format!("d={}: mean NMI {mean:.4}", row.d));
    }
    outcome(pass, parts.join(", "))
}

fn oracle_values() -> HashMap<String, f64> {
    ORACLE
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().parse().unwrap()))
        .collect()
}

fn student_t_oracle() -> Outcome {
    let oracle = oracle_values();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (nu, label) in [(0.5, "0.5"), (1.0, "1"), (2.0, "2"), (10.0, "10")] {
        for d in [1, 4, 16] {
            for (name, got) in [
                ("c", student_t_c(nu, d).unwrap()),
                ("h_t", student_t_marginal_entropy(nu, d).unwrap()),
            ] {
                let Some(&want) = oracle.get(&format!("{name}({label},{d})")) else {
                    return outcome(false, format!("no oracle value for {name}({label},{d})"));
                };
                worst = worst.max((got - want).abs() / want.abs());
                checked += 1;
            }
        }
    }
    outcome(
        checked == 24 && worst <= 1e-10,
        format!("{checked} values, worst relative error {worst:.2e}"),
    )
}

fn cheb(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn all_pairs(data: &Dataset, k: usize) -> RadiusSet {
    let n = data.n();
    let joint = |i: usize, j: usize| {
        cheb(data.x_row(i), data.x_row(j)).max(cheb(data.y_row(i), data.y_row(j)))
    };
    let mut out = RadiusSet {
        epsilon: vec![],
        n_x: vec![],
        n_y: vec![],
        k,
    };
    for i in 0..n {
        let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| joint(i, j)).collect();
        row.sort_by(f64::total_cmp);
        let e = row[k - 1];
        out.epsilon.push(e);
        out.n_x.push(
            (0..n)
                .filter(|&j| j != i && cheb(data.x_row(i), data.x_row(j)) < e)
                .count(),
        );
        out.n_y.push(
            (0..n)
                .filter(|&j| j != i && cheb(data.y_row(i), data.y_row(j)) < e)
                .count(),
        );
    }
    out
}

fn random_dataset(rng: &mut ChaCha20Rng, n: usize, d_x: usize, d_y: usize) -> Dataset {
    let x = (0..n * d_x)
        .map(|_| rng.random_range(-10.0..10.0))
        .collect();
    let y = (0..n * d_y)
        .map(|_| rng.random_range(-10.0..10.0))
        .collect();
    Dataset::new(x, d_x, y, d_y).unwrap()
}

fn invariance_suite() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut failures = Vec::new();

    for trial in 0..200 {
        let n = rng.random_range(2..300);
        let eps = log_uniform_radii(n, 0.1, 10.0, rng.random()).unwrap();
        let d = rng.random_range(1..64);
        let c = rng.random_range(-5.0f64..5.0).exp();
        let scaled: Vec<f64> = eps.iter().map(|e| e * c).collect();
        for backend in Backend::ALL {
            let a = normalize(backend, &eps, d).unwrap();
            let b = normalize(backend, &scaled, d).unwrap();
            if (b.ln_v - a.ln_v - c.ln()).abs() > 1e-12 * b.ln_v.abs().max(1.0) {
                failures.push(format!("ln_v scale equivariance, {backend}, trial {trial}"));
            }
            let sa = scale_radii(&eps, &a).unwrap();
            let sb = scale_radii(&scaled, &b).unwrap();
            if sa
                .epsilon_tilde
                .iter()
                .zip(&sb.epsilon_tilde)
                .any(|(p, q)| (p - q).abs() > 1e-12 * p.max(1.0))
            {
                failures.push(format!("scaled radii invariance, {backend}, trial {trial}"));
            }
        }
    }

    for trial in 0..40 {
        let n = rng.random_range(10..=200);
        let (d_x, d_y) = (rng.random_range(1..4), rng.random_range(1..4));
        let k = rng.random_range(1..6);
        let data = random_dataset(&mut rng, n, d_x, d_y);
        let got = compute_knn_radii(&data, k).unwrap();
        if got != all_pairs(&data, k) {
            failures.push(format!("all-pairs equivalence, trial {trial}"));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let moved = compute_knn_radii(&data.permuted(&perm).unwrap(), k).unwrap();
        let equivariant = perm.iter().enumerate().all(|(i, &p)| {
            moved.epsilon[i] == got.epsilon[p]
                && moved.n_x[i] == got.n_x[p]
                && moved.n_y[i] == got.n_y[p]
        });
        if !equivariant {
            failures.push(format!("permutation equivariance, trial {trial}"));
        }
        for backend in Backend::ALL {
            let a = estimate(&data, k, backend).unwrap();
            let b = estimate(&data.swapped(), k, backend).unwrap();
            let close = |p: f64, q: f64| (p - q).abs() <= 1e-12;
            let nmi_ok = match (a.nmi.value(), b.nmi.value()) {
                (Some(p), Some(q)) => close(p, q),
                (None, None) => true,
                _ => false,
            };
            if !(a.h_x == b.h_y
                && a.h_y == b.h_x
                && close(a.mi_ksg, b.mi_ksg)
                && close(a.mi_from_entropies, b.mi_from_entropies)
                && nmi_ok)
            {
                failures.push(format!("X/Y symmetry, {backend}, trial {trial}"));
            }
        }
    }

    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "200 radius vectors x 3 backends, 40 datasets with N <= 200".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn strip_last_column(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "family = \"gaussian\"\ndims = [1, 4, 512]\nrho_grid = [0.0, 0.9, 1.0]\nn = 300\nrepetitions = 3\n\
         backends = [\"baseline\", \"proposed\", \"dominant_term\"]\nbase_seed = 2024\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_knn-nmi"))
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, String::from_utf8_lossy(&status.stderr).into_owned());
        }
        outputs.push(std::fs::read_to_string(&out).unwrap());
    }
    let header_ok = outputs[0]
        .lines()
        .next()
        .is_some_and(|h| h.ends_with(",wall_time_ms"));
    let rows = outputs[0].lines().count() - 1;
    let same = strip_last_column(&outputs[0]) == strip_last_column(&outputs[1]);
    outcome(
        header_ok && same && rows == 81,
        format!("{rows} records, identical modulo wall_time_ms: {same}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("backend equivalence", backend_equivalence),
        ("overflow reproduction", overflow_reproduction),
        ("stability profile shape", stability_shape),
        ("gaussian ground-truth accuracy", gaussian_accuracy),
        ("independence null", independence_null),
        ("student-t truth oracle", student_t_oracle),
        ("invariance suite", invariance_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("{tag} {} {name} [{secs:.1}s]: {}", i + 1, result.detail);
        failed += usize::from(!result.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
