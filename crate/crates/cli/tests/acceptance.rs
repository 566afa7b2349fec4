use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stdsets::cases::{ct3_derived, ct3_identity, gamma16_identity, ht2_branch_identity, ht2_clusters};
use stdsets::derived::{certify, derived_once, derived_set_checked, CertVerdict};
use stdsets::dsl::{eval, parse, Value};
use stdsets::geomsets::{diag_lct, gamma16, kmoduli_walls};
use stdsets::laws::run_suite;
use stdsets::oracle::{cross_check_derived, default_resolution, fit_standardized, FitVerdict, Sample};
use stdsets::random::{random_atom, random_family, random_program, AtomShape};
use stdsets::serial::{family_from_json, family_to_json};
use stdsets::setops::hyperstandard;
use stdsets::*;

type Check = Result<String, String>;

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn report(l: &Line) {
    let text = format!(
        "criterion {} {:<4} {:<34} {:>8.2} s  {}\n",
        l.id,
        if l.pass { "PASS" } else { "FAIL" },
        l.title,
        l.elapsed.as_secs_f64(),
        l.detail
    );
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(text.as_bytes());
    let _ = err.flush();
}

fn run(id: usize, title: &'static str, limit: Option<Duration>, f: impl FnOnce() -> Check) -> Line {
    let start = Instant::now();
    let r = f();
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(lim) = limit {
        if elapsed > lim {
            pass = false;
            detail = format!("{detail}; over the {} s limit", lim.as_secs());
        }
    }
    let line = Line { id, title, pass, detail, elapsed };
    report(&line);
    line
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1() -> Check {
    let n = gamma16_identity(100_000)?;
    let g = gamma16();
    let c = certify(&g);
    ensure(c.verdict == CertVerdict::Standardized, format!("certify: {:?}", c.verdict))?;
    let d = derived_set_checked(&g, 1);
    ensure(d.exact && d.family.normalized() == SetFamily::finite([rat(5, 6)]), "derived set is not {5/6}")?;
    Ok(format!("{n} identities; standardized, depth {}, derived set {{5/6}}", c.depth))
}

fn c2() -> Check {
    let n = ht2_branch_identity(6, 10_000)?;
    Ok(format!("{n} identities"))
}

fn c3() -> Check {
    let (clusters, r) = ht2_clusters(50, &rat(1, 512));
    let d = r?;
    let list: Vec<String> = clusters.iter().map(|c| c.interval.to_string()).collect();
    Ok(format!("{d}: {}", list.join(" ")))
}

fn c4() -> Check {
    let n = ct3_identity(10, 10, 10_000)?;
    let m = ct3_derived(10, 10)?;
    Ok(format!("{n} identities; {m} branches with derived set {{1/k}}"))
}

fn c5() -> Check {
    let tallies = run_suite(5, 200);
    let mut parts = Vec::new();
    let (mut unknown, mut total, mut failed) = (0, 0, Vec::new());
    for t in &tallies {
        unknown += t.unknown;
        total += t.total();
        parts.push(format!("{} {}/{}", t.name, t.holds, t.total()));
        failed.extend(t.failures.iter().map(|f| format!("{}: {f}", t.name)));
        ensure(t.total() == 200, format!("{} ran {} cases", t.name, t.total()))?;
    }
    let rate = unknown as f64 / total as f64;
    let summary = format!("unknown rate {:.2} %; {}", rate * 100.0, parts.join(", "));
    ensure(
        failed.is_empty(),
        format!("{} failures, first {}; {summary}", failed.len(), failed.first().cloned().unwrap_or_default()),
    )?;
    ensure(rate <= 0.05, summary.clone())?;
    Ok(summary)
}

fn c6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shape = AtomShape::default();
    let w = Interval::new(int(-2), int(2)).unwrap();
    let res = default_resolution();
    let (mut checked, mut skipped, mut matched) = (0, 0, 0);
    while checked < 100 {
        let f = SetFamily::single(random_atom(&mut rng, &shape));
        if !derived_once(&f).exact {
            skipped += 1;
            continue;
        }
        let r = cross_check_derived(&f, &w, 300, &res);
        ensure(
            r.agrees(),
            format!(
                "{}: empirical-only {:?}, undecided {:?}, unexplained {:?}",
                f.atoms[0],
                r.empirical_only.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
                r.undecided.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
                r.unexplained().iter().map(|p| p.to_string()).collect::<Vec<_>>()
            ),
        )?;
        matched += r.matched.len();
        checked += 1;
    }
    Ok(format!("{checked} atoms agree, {matched} matched points, {skipped} degenerate atoms skipped"))
}

fn sample(values: Vec<Rational>) -> Sample {
    let mut values = values;
    values.sort();
    values.dedup();
    Sample { values, window: Interval::new(int(0), int(1)).unwrap(), cap: 200, exhaustive: true }
}

fn c7() -> Check {
    let quad = fit_standardized(&sample((1..=200).map(|n| rat(n, n * n + 1)).collect()), &int(0), 1);
    let FitVerdict::Inconsistent { evidence } = &quad.verdict else {
        return Err(format!("n/(n^2+1): {:?}", quad.verdict));
    };
    let harm = fit_standardized(&sample((1..=200).map(|n| rat(1, n)).collect()), &int(0), 1);
    match &harm.verdict {
        FitVerdict::Consistent { i, .. } if *i == 1.into() => {}
        v => return Err(format!("1/n: {v:?}")),
    }
    Ok(format!("n/(n^2+1) inconsistent at {evidence}; 1/n consistent, I = 1"))
}

fn c8() -> Check {
    let h = hyperstandard(&[int(0), int(1), int(4)]).map_err(|e| e.to_string())?;
    let c = certify(&h);
    ensure(
        c.verdict == CertVerdict::Standardized && c.depth == 2,
        format!("hyper: {:?} depth {}", c.verdict, c.depth),
    )?;
    let w = Interval::new(int(-2), int(2)).unwrap();
    for d in 1..=3usize {
        let f = diag_lct(d).map_err(|e| e.to_string())?;
        let c = certify(&f);
        let want = d + 1;
        ensure(
            c.verdict == CertVerdict::Standardized && c.depth == want,
            format!("diag({d}): {:?} depth {}", c.verdict, c.depth),
        )?;
        let mut level = f.clone();
        for k in 0..d {
            let r = cross_check_derived(&level, &w, 120, &default_resolution());
            ensure(r.agrees(), format!("diag({d}) level {k}: oracle disagrees"))?;
            level = derived_set_checked(&level, 1).family;
        }
    }
    let Atom::Finite(walls) = &kmoduli_walls().atoms[0] else { return Err("walls are not finite".into()) };
    for x in walls {
        ensure(matches!(member(&h, x, 10_000), Ok(Verdict::In(_))), format!("wall {x} not hyperstandard"))?;
    }
    Ok(format!("hyper depth 2; diag(d) depth d+1 for d <= 3; {} walls inside", walls.len()))
}

fn dsl_round_trip() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut evaluated = 0;
    for _ in 0..500 {
        let p = random_program(&mut rng, 3);
        let text = p.to_string();
        let q = parse(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure(q == p && q.to_string() == text, format!("round trip differs: {text}"))?;
        let outcome = |p| eval(p).map_err(|e| format!("{} {}", e.kind.code(), e.message));
        let a = outcome(&p);
        ensure(a == outcome(&q), format!("evaluation differs: {text}"))?;
        if let Ok(Value::Family(_)) = a {
            evaluated += 1;
        }
    }
    Ok(evaluated)
}

fn json_fidelity() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let f = random_family(&mut rng, &AtomShape::default(), 3);
        let text = family_to_json(&f);
        let g = family_from_json(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure(g == f && family_to_json(&g) == text, format!("json differs: {text}"))?;
    }
    Ok(())
}

fn cli_contract() -> Result<usize, String> {
    const MALFORMED: &str = "fam(5/6; 1/m[1 n[1])";
    let cases: &[(&[&str], i32)] = &[
        (&["enum", "ht1()", "--interval", "1/5..1", "--cap", "100", "--format", "csv"], 0),
        (&["enum", MALFORMED, "--interval", "0..1"], 3),
        (&["derived", "fam(0; 1/n[1] + 1/m[1])", "-k", "2"], 0),
        (&["derived", "fam(0; 1/n[1]*m[1] - 1/n[1]*p[1])"], 2),
        (&["derived", MALFORMED], 3),
        (&["check", "g16()", "--near", "5/6"], 0),
        (&["check", "fam(0; 1/n[1] + 1/m[1])", "--near", "0"], 1),
        (&["check", "fam(0; 1/n[1]*m[1] - 1/n[1]*p[1])", "--near", "0"], 2),
        (&["check", MALFORMED, "--near", "0"], 3),
        (&["certify", "g16()"], 0),
        (&["certify", "fam(0; 1/n[1]*m[1] - 1/n[1]*p[1])"], 2),
        (&["certify", MALFORMED], 3),
        (&["fit", "ht1()", "--near", "0", "--interval", "-1..1", "--cap", "200"], 0),
        (&["fit", "fam(0; 3/n[1])", "--near", "0", "--interval", "-1..1", "--cap", "50", "--bound", "1"], 1),
        (&["fit", "{1}", "--near", "0", "--interval", "-1..1"], 2),
        (&["fit", MALFORMED, "--near", "0", "--interval", "-1..1"], 3),
        (&["verify-paper", "--case", "ex16"], 0),
        (&["verify-paper", "--case", "nope"], 3),
        (&[], 3),
    ];
    for (args, want) in cases {
        let out = Command::new(env!("CARGO_BIN_EXE_stdsets"))
            .args(*args)
            .env_remove("LCT_DEFAULT_CAP")
            .output()
            .map_err(|e| e.to_string())?;
        let got = out.status.code();
        ensure(got == Some(*want), format!("{args:?}: exit {got:?}, expected {want}"))?;
        if *want == 3 {
            ensure(out.stdout.is_empty() && !out.stderr.is_empty(), format!("{args:?}: diagnostics not on stderr"))?;
        }
    }
    Ok(cases.len())
}

fn c9() -> Check {
    let evaluated = dsl_round_trip()?;
    json_fidelity()?;
    let n = cli_contract()?;
    Ok(format!("500 programs round trip ({evaluated} evaluate to families), 500 families through json, {n} exit codes"))
}

#[test]
fn acceptance() {
    let secs = |s| Some(Duration::from_secs(s));
    let lines = [
        run(1, "rewrite identity and certificate", secs(5), c1),
        run(2, "plane branch identity", secs(60), c2),
        run(3, "empirical plane limit points", secs(30), c3),
        run(4, "cubic branch identity", secs(30), c4),
        run(5, "law suite", None, c5),
        run(6, "symbolic vs oracle derived sets", secs(120), c6),
        run(7, "negative control", None, c7),
        run(8, "depth checks", None, c8),
        run(9, "tooling", None, c9),
    ];
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
