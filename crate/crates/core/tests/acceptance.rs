//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs under `cargo test` with a custom harness so every line is
//! printed, passing or not.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recurstat::distribution::{avoiding_pairs_prob, law_bruteforce, law_exact, law_limit};
use recurstat::divergence::{
    divergence_enum, divergence_iid, divergence_markov, divergence_seq, exact_rate, CylinderTable, MethodChoice,
};
use recurstat::experiments::{
    concentration_experiment, ldp_curve, nonconvergence_probe, rate_oscillation_demo, threshold_index,
};
use recurstat::measures::Pattern;
use recurstat::overlap::{shortest_path, shortest_return};
use recurstat::word::Alphabet;
use recurstat::Measure;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const CONC_SEED: u64 = 20_240_607;
const CONC_SCHEDULE: [usize; 5] = [32, 64, 128, 256, 512];
const NONCONV_SEED: u64 = 9;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn criterion_1() -> Check {
    let labels: Vec<String> = "ABCDEHKRV".chars().map(String::from).collect();
    let abc = Alphabet::new(&labels).unwrap();
    let x = abc.parse_word("ABRACADABRA").unwrap();
    let y = abc.parse_word("AVRAKEHDABRA").unwrap();
    let z = abc.parse_word("ABBADAKEDABRA").unwrap();
    let t = |a: &recurstat::Word, b: &recurstat::Word, n: usize| shortest_path(&a.truncated(n), &b.truncated(n)).unwrap();
    let start = Instant::now();
    let got = [
        t(&x, &y, 11),
        t(&x, &z, 11),
        t(&y, &x, 11),
        t(&z, &x, 11),
        t(&x, &x, 11),
        t(&y, &y, 12),
        t(&z, &z, 13),
    ];
    let elapsed = start.elapsed();
    ensure(shortest_return(&x).unwrap() == 7, || "shortest return of x is not 7".into())?;
    let want = [8, 9, 10, 10, 7, 11, 12];
    ensure(got == want, || format!("got {got:?}, want {want:?}"))?;
    ensure(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("seven golden shortest paths exact in {elapsed:?}"))
}

fn criterion_2() -> Check {
    let mut worst = 0.0f64;
    for p in [0.1, 0.3, 0.49] {
        let (mu, nu) = (Measure::bernoulli(p).unwrap(), Measure::bernoulli(1.0 - p).unwrap());
        let base = 2.0 * p * (1.0 - p);
        let seq = divergence_seq(&mu, &nu, 40, MethodChoice::Auto).unwrap();
        for k in 1..=40 {
            let err = rel_err(seq.e(k).value, base.powi(k as i32));
            worst = worst.max(err);
            ensure(err <= 1e-12, || format!("p={p} k={k}: E(k) relative error {err:e}"))?;
        }
        let rate = exact_rate(&mu, &nu).unwrap().value.as_f64();
        let err = rel_err(rate, -base.ln());
        ensure(err <= 1e-12, || format!("p={p}: rate relative error {err:e}"))?;
        for i in 1..=20 {
            for j in 1..=20 {
                let err = rel_err(seq.e(i + j).value, seq.e(i).value * seq.e(j).value);
                ensure(err <= 1e-13, || format!("p={p}: E({i}+{j}) multiplicativity error {err:e}"))?;
            }
        }
    }
    for s in 2..=6 {
        let u = Measure::uniform(s).unwrap();
        let rate = exact_rate(&u, &u).unwrap().value.as_f64();
        let want = (s as f64).ln();
        ensure(rate == want, || format!("uniform {s}: rate {rate:e} != ln {s} = {want:e}"))?;
    }
    Ok(format!("Bernoulli closed forms, max relative error {worst:.1e}; uniform rates equal ln s"))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for size in 2..=3 {
        for variant in 0..3 {
            for _ in 0..2 {
                let (mu, nu) = common::random_pair(&mut rng, size, variant);
                pairs += 1;
                for k in 1..=10 {
                    let direct = if variant == 0 {
                        divergence_iid(&mu, &nu, k).unwrap()
                    } else {
                        divergence_markov(&mu, &nu, k).unwrap()
                    };
                    let err = rel_err(divergence_enum(&mu, &nu, k).unwrap().value, direct.value);
                    worst = worst.max(err);
                    ensure(err <= 1e-12, || format!("|X|={size} variant {variant} k={k}: {err:e}"))?;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{pairs} pairs, k <= 10, max relative gap {worst:.1e} in {elapsed:.2?}"))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let u = Measure::uniform(2).unwrap();
    let t = law_exact(&u, &u, 3).unwrap();
    let want = [0.25, 0.375, 0.375];
    ensure(t.pmf.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-15), || format!("uniform n=3 pmf {:?}", t.pmf))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = 0;
    let mut worst = 0.0f64;
    for (size, lengths) in [(2usize, 2usize..=10), (3, 2..=6)] {
        for n in lengths {
            for variant in 0..3 {
                if size == 2 && variant == 2 && n % 2 == 1 {
                    continue;
                }
                let (mu, nu) = common::random_pair(&mut rng, size, variant);
                let exact = law_exact(&mu, &nu, n).map_err(|e| e.to_string())?;
                let brute = law_bruteforce(&mu, &nu, n).map_err(|e| e.to_string())?;
                let gap = exact.max_discrepancy(&brute);
                worst = worst.max(gap);
                pairs += 1;
                ensure(gap <= 1e-10, || format!("|X|={size} n={n} variant {variant}: discrepancy {gap:e}"))?;
            }
        }
    }
    ensure(pairs >= 20, || format!("only {pairs} pairs"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{pairs} pairs plus uniform n=3, max discrepancy {worst:.1e} in {elapsed:.2?}"))
}

fn criterion_5() -> Check {
    let u = Measure::uniform(2).unwrap();
    let v = avoiding_pairs_prob(&u, &u, 3).unwrap();
    ensure((v - 0.375).abs() <= 1e-15, || format!("uniform n=3 gives {v}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for size in 2..=3 {
        for n in 2..=6 {
            let (mu, nu) = common::random_pair(&mut rng, size, n);
            let v = avoiding_pairs_prob(&mu, &nu, n).unwrap();
            // count pairs with no overlap at all, weighted by their mass
            let table_x = CylinderTable::new(&mu, &mu, n).unwrap();
            let table_y = CylinderTable::new(&nu, &nu, n).unwrap();
            let words = enumerate_words(size, n);
            let mut counted = 0.0;
            for (ix, x) in words.iter().enumerate() {
                for (iy, y) in words.iter().enumerate() {
                    let overlap = (1..n).any(|j| x[n - j..] == y[..j]);
                    if !overlap {
                        counted += table_x.weights().0[ix] * table_y.weights().0[iy];
                    }
                }
            }
            ensure((v - counted).abs() <= 1e-12, || format!("|X|={size} n={n}: {v} vs counted {counted}"))?;
            checked += 1;
        }
    }
    Ok(format!("uniform n=3 gives 3/8; {checked} random pairs match direct counting"))
}

fn enumerate_words(size: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..size as u32).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut mono, mut gaps) = (0usize, 0usize);
    for idx in 0..200 {
        let size = 2 + idx % 2;
        let (mu, nu) = common::random_pair(&mut rng, size, idx / 2);
        let seq = divergence_seq(&mu, &nu, 12, MethodChoice::Auto).unwrap();
        for k in 0..=12 {
            for l in k + 1..=12 {
                let excess = seq.e(l).value - seq.e(k).value;
                ensure(excess <= 1e-12, || format!("pair {idx}: E({l}) exceeds E({k}) by {excess:e}"))?;
                mono += 1;
            }
        }
        for len in 1..=10 {
            let table = CylinderTable::new(&mu, &nu, len).unwrap();
            for i in 0..=len {
                for g in 0..=len - i {
                    let slack = table.gap_slack(i, g);
                    let j = len - i - g;
                    ensure(slack >= -1e-12, || format!("pair {idx}: (i,g,j)=({i},{g},{j}) slack {slack:e}"))?;
                    gaps += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("200 pairs, {mono} ordered pairs and {gaps} gap splits, no violation, {elapsed:.2?}"))
}

fn concentration_report() -> String {
    let (mu, nu) = common::sticky_chains();
    let r = concentration_experiment(&mu, &nu, &CONC_SCHEDULE, 10_000, 0.9, CONC_SEED).unwrap();
    serde_json::to_string(&r).unwrap()
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let (mu, nu) = common::sticky_chains();
    let r = concentration_experiment(&mu, &nu, &CONC_SCHEDULE, 10_000, 0.9, CONC_SEED).map_err(|e| e.to_string())?;
    let rate = exact_rate(&mu, &nu).and_then(|r| r.value.finite()).ok_or("no exact rate")?;
    let mut tightest = f64::INFINITY;
    for row in &r.rows {
        let n = row.n as f64;
        let floor = 1.0 - 5.0 / rate * n.ln() / n - 3.0 * row.std_err;
        ensure(row.mean >= floor && row.mean <= 1.0, || {
            format!("n={}: mean {} outside [{floor}, 1]", row.n, row.mean)
        })?;
        let bound = row.exact_bound.ok_or("missing exact bound")?;
        ensure(row.below <= bound, || format!("n={}: P(T/n < 0.9) = {} above bound {bound}", row.n, row.below))?;
        ensure(threshold_index(0.1, row.n) == (row.n as f64 / 10.0).floor() as usize + 1, || "k* mismatch".into())?;
        if row.below > 0.0 {
            tightest = tightest.min((bound - row.below) / row.below_se);
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "R = {rate:.4}, means within bounds at n = 32..512, tightest tail margin {tightest:.1} SE, {elapsed:.2?}"
    ))
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let bern = (Measure::bernoulli(0.3).unwrap(), Measure::bernoulli(0.7).unwrap());
    let mut worst = [0.0f64; 2];
    for (idx, ((mu, nu), tol)) in [(bern, 0.02), (common::mixing_chains(), 0.05)].into_iter().enumerate() {
        let curve = ldp_curve(&mu, &nu, &[0.1, 0.25, 0.5], 4000).map_err(|e| e.to_string())?;
        for pt in &curve.points {
            let reference = pt.reference.ok_or("no reference rate")?;
            for (name, r) in [("lower", pt.lower_rate), ("upper", pt.upper_rate)] {
                let err = rel_err(r.as_f64(), reference);
                worst[idx] = worst[idx].max(err);
                ensure(err <= tol, || format!("pair {idx} eps={}: {name} rate off by {err:.3}", pt.epsilon))?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "n=4000, worst relative gap {:.2}% (iid) and {:.2}% (markov), {elapsed:.2?}",
        100.0 * worst[0],
        100.0 * worst[1]
    ))
}

fn nonconv_report() -> String {
    let u = Measure::uniform(2).unwrap();
    serde_json::to_string(&nonconvergence_probe(&u, &u, 20, 100_000, NONCONV_SEED).unwrap()).unwrap()
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let u = Measure::uniform(2).unwrap();
    let r = nonconvergence_probe(&u, &u, 20, 100_000, NONCONV_SEED).map_err(|e| e.to_string())?;
    let mut rows = 0;
    let mut worst = 0.0f64;
    for row in r.rows.iter().filter(|r| r.hits >= 500) {
        let z = row.z.ok_or("zero sigma")?;
        worst = worst.max(z.abs());
        ensure(z.abs() <= 3.0, || format!("k={}: z = {z:.2}", row.k))?;
        rows += 1;
    }
    ensure(r.p_same > 0.3, || format!("P(T_21 = T_20) = {}", r.p_same))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{rows} rows, max |z| {worst:.2}, P(T_21 = T_20) = {:.4}, {elapsed:.2?}", r.p_same))
}

fn criterion_10() -> Check {
    let start = Instant::now();
    let r = rate_oscillation_demo(0.3, 1 << 13).map_err(|e| e.to_string())?;
    let spread = r.limsup_est.as_f64() - r.liminf_est.as_f64();
    let elapsed = start.elapsed();
    ensure(spread >= 0.1, || format!("limsup - liminf = {spread}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("limsup - liminf = {spread:.4} over window {:?}, {elapsed:.2?}", r.window))
}

fn criterion_11() -> Check {
    let (lambda, p) = (0.4, 0.3);
    let one = Measure::dirac(Alphabet::binary(), Pattern::Periodic(vec![1])).unwrap();
    let nu = Measure::mixture(lambda, one.clone(), Measure::bernoulli(p).unwrap()).unwrap();
    let lim = law_limit(&one, &nu, 3, 12).map_err(|e| e.to_string())?;
    ensure(lim.defect_lower_bound >= 0.4, || format!("defect bound {}", lim.defect_lower_bound))?;
    ensure(!lim.certified, || "limit law certified despite the defect".into())?;

    let seq = divergence_seq(&one, &nu, 29, MethodChoice::Closed).map_err(|e| e.to_string())?;
    let (mut mismatched, mut literal_err, mut shifted_err) = (0, 0.0f64, 0.0f64);
    for n in 1..=30usize {
        // P(T_n = 1) is the tail at n - 1, where the overlap coefficient vanishes
        let value = seq.e(n - 1).value;
        if n <= 20 {
            let table = law_exact(&one, &nu, n).map_err(|e| e.to_string())?;
            ensure((table.pmf_at(1) - value).abs() <= 1e-12, || {
                format!("n={n}: routes disagree, {} vs {value}", table.pmf_at(1))
            })?;
        }
        if n <= 10 {
            let brute = law_bruteforce(&one, &nu, n).map_err(|e| e.to_string())?;
            ensure((brute.pmf_at(1) - value).abs() <= 1e-12, || format!("n={n}: brute force gives {}", brute.pmf_at(1)))?;
        }
        let literal = lambda + (1.0 - lambda) * p.powi(n as i32);
        let shifted = lambda + (1.0 - lambda) * p.powi(n as i32 - 1);
        if (value - literal).abs() > 1e-12 {
            mismatched += 1;
        }
        literal_err = literal_err.max((value - literal).abs());
        shifted_err = shifted_err.max((value - shifted).abs());
    }
    ensure(mismatched == 0, || {
        format!(
            "defect bound {} and no certificate as required, but P(T_n = 1) differs from \
             0.4 + 0.6 p^n at {mismatched} of 30 lengths (max |diff| {literal_err:.2e}); three \
             routes agree it equals 0.4 + 0.6 p^(n-1) within {shifted_err:.1e}",
            lim.defect_lower_bound
        )
    })?;
    Ok(format!("defect bound {}, not certified, P(T_n = 1) matches for n <= 30", lim.defect_lower_bound))
}

fn cli_experiment(workers: &str, config: &std::path::Path) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_recurstat"))
        .args(["--workers", workers, "experiment", "concentration", "--config"])
        .arg(config)
        .args(["--seed", "17"])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_12() -> Check {
    let pool = |threads: usize| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let base = (concentration_report(), nonconv_report());
    for threads in [1, 4] {
        let again = pool(threads).install(|| (concentration_report(), nonconv_report()));
        ensure(again.0 == base.0, || format!("concentration report differs with {threads} workers"))?;
        ensure(again.1 == base.1, || format!("non-convergence report differs with {threads} workers"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("conc.json");
    std::fs::write(
        &config,
        r#"{"mu":{"type":"markov","alphabet":["a","b","c"],
                  "transition":[[0.9,0.05,0.05],[0.05,0.9,0.05],[0.05,0.05,0.9]]},
            "nu":{"type":"iid","alphabet":["a","b","c"],"probs":[0.5,0.3,0.2]},
            "n_schedule":[16,64],"samples":3000}"#,
    )
    .map_err(|e| e.to_string())?;
    let runs = [cli_experiment("1", &config), cli_experiment("1", &config), cli_experiment("4", &config)];
    ensure(runs[0] == runs[1], || "CLI reruns differ".into())?;
    ensure(runs[0] == runs[2], || "CLI report differs between 1 and 4 workers".into())?;
    Ok(format!(
        "reports byte-identical across reruns and 1/4 workers ({} + {} + {} bytes)",
        base.0.len(),
        base.1.len(),
        runs[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("golden shortest paths", criterion_1),
        ("divergence closed forms", criterion_2),
        ("method agreement", criterion_3),
        ("exact law vs brute force", criterion_4),
        ("avoiding pairs", criterion_5),
        ("monotonicity and gap inequality", criterion_6),
        ("concentration", criterion_7),
        ("large-deviation bounds", criterion_8),
        ("non-convergence probe", criterion_9),
        ("rate oscillation", criterion_10),
        ("defect mass", criterion_11),
        ("reproducibility", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): panicked", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
