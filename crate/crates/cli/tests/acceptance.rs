//! End-to-end acceptance run: one line per criterion, nonzero exit on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use a2_building::arith::{char_poly, newton_slopes, Matrix, Prime};
use a2_building::building::{
    residue_chambers, residue_opposite, u_cylinder_contains, vector_distance, Vertex,
};
use a2_building::coxeter::A2Vector;
use a2_building::isometry::{
    attracting_flag, axis_vertex, cartan_projection, geometric_srh_criterion, jordan_projection,
    GroupElement,
};
use common::*;
use num_rational::Rational64;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: u64 = 20240601;
const ORACLE_MATRICES: usize = 1000;
const SOUNDNESS_PAIRS: usize = 1000;
const AXIS_ELEMENTS: usize = 100;
const LIMIT_ELEMENTS: usize = 50;
const LIMIT_N: i64 = 60;
/// C is the largest deviation seen for n up to this, then tested at LIMIT_N.
const LIMIT_CALIBRATION: i64 = 30;
const MIN_SRH_FRACTION: f64 = 0.9;
const MIN_OPPOSITE_FRACTION: f64 = 0.9;
const MIN_STABILIZED_FRACTION: f64 = 0.9;
const MAX_POWER: u64 = 8;
const WORDS_AT_DEPTH_8: u64 = 8748;
const Z95: f64 = 1.959_963_984_540_054;

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

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Runs the CLI, returning the exit code and the files written to `out`.
fn cli(args: &[&str], config: &str, out: &Path, workers: usize) -> (i32, Vec<(String, Vec<u8>)>) {
    let status = Command::new(env!("CARGO_BIN_EXE_a2walk"))
        .args(args)
        .arg("--config")
        .arg(configs().join(config))
        .arg("--out")
        .arg(out)
        .arg("--workers")
        .arg(workers.to_string())
        .status()
        .expect("spawn a2walk");
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out)
        .map(|d| {
            d.map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect()
        })
        .unwrap_or_default();
    files.sort();
    (status.code().unwrap_or(-1), files)
}

fn report(files: &[(String, Vec<u8>)]) -> Value {
    let (_, body) = files
        .iter()
        .find(|(n, _)| n == "report.json")
        .expect("report.json written");
    serde_json::from_slice(body).unwrap()
}

fn wilson_low(k: u64, n: u64) -> f64 {
    let (k, n) = (k as f64, n as f64);
    let ph = k / n;
    let z2 = Z95 * Z95;
    let centre = ph + z2 / (2.0 * n);
    let half = Z95 * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt();
    (centre - half) / (1.0 + z2 / n)
}

fn conjugates_of_diagonal(r: &mut ChaCha8Rng, p: Prime, count: usize) -> Vec<GroupElement> {
    // a > b > 0, a ≤ 3 and a + b ≡ 0 mod 3 leaves (a, b) = (2, 1)
    let d = el(Matrix::p_diagonal(p, &[2, 1, 0]), p);
    (0..count)
        .map(|_| {
            let u = el(random_matrix(r, p, -1, 1), p);
            u.mul(&d).mul(&u.inverse())
        })
        .collect()
}

fn c1() -> Outcome {
    let p = p2();
    let r = &mut rng(SEED);
    let o = Vertex::standard(p);
    let mut mismatches = 0;
    for _ in 0..ORACLE_MATRICES {
        let m = random_matrix(r, p, -3, 3);
        let d = smith_oracle(&m, p);
        let want = A2Vector::from_ints(d[2], d[1], d[0]).pgl_normalize();
        let y = Vertex::new(&m, p).unwrap();
        if vector_distance(&o, &y).unwrap().pgl != want {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches in {ORACLE_MATRICES} matrices"),
    )
}

fn c2() -> Outcome {
    let mut bad = 0;
    if A2Vector::from_ints(1, 0, 0).opposition() != A2Vector::from_ints(1, 1, 0) {
        bad += 1;
    }
    for a in 0..=4 {
        for b in 0..=4 {
            for c in 0..=4 {
                let v = A2Vector::from_ints(a, b, c);
                let j = v.opposition_raw();
                let t = v.type_residue().unwrap();
                let swapped = (3 - t) % 3;
                if j.opposition_raw() != v || j.type_residue() != Some(swapped) {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("{bad} violations over [0,4]^3"))
}

fn c3() -> Outcome {
    // Fano plane from the difference set {0, 1, 3} mod 7, no linear algebra
    let on = |pt: usize, line: usize| [0, 1, 3].iter().any(|&d| (line + d) % 7 == pt);
    let flags: Vec<(usize, usize)> = (0..7)
        .flat_map(|l| (0..7).filter(move |&q| on(q, l)).map(move |q| (q, l)))
        .collect();
    let oracle: Vec<usize> = flags
        .iter()
        .map(|&(q, l)| {
            flags
                .iter()
                .filter(|&&(q2, l2)| !on(q, l2) && !on(q2, l))
                .count()
        })
        .collect();
    let all = residue_chambers(Prime::new(2).unwrap());
    let counts: Vec<usize> = all
        .iter()
        .map(|c| all.iter().filter(|d| residue_opposite(c, d)).count())
        .collect();
    let pass = all.len() == flags.len()
        && all.len() == 21
        && counts.iter().all(|&k| k == 8)
        && oracle.iter().all(|&k| k == 8);
    let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
    outcome(
        pass,
        format!(
            "{} chambers, {lo} to {hi} opposite per chamber, oracle agrees",
            all.len()
        ),
    )
}

fn c4() -> Outcome {
    let p = p2();
    let r = &mut rng(SEED + 4);
    let (mut fired, mut violations) = (0, 0);
    for _ in 0..SOUNDNESS_PAIRS {
        let g = random_type_preserving(r, p, -2, 2);
        let o = Vertex::new(&random_matrix(r, p, -2, 2), p).unwrap();
        if geometric_srh_criterion(&g, &o).unwrap_or(false) {
            fired += 1;
            let s = newton_slopes(&char_poly(g.matrix()), p).unwrap();
            if s[0] == s[1] || s[1] == s[2] {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations, criterion held in {fired}/{SOUNDNESS_PAIRS}"),
    )
}

fn c5_c6() -> (Outcome, Outcome) {
    let p = p2();
    let elements = conjugates_of_diagonal(&mut rng(SEED + 5), p, AXIS_ELEMENTS);
    let (mut axis_bad, mut cyl_bad) = (0, 0);
    for g in &elements {
        let x = axis_vertex(g, 32).unwrap();
        let ok = geometric_srh_criterion(g, &x).unwrap()
            && cartan_projection(g, &x).unwrap() == jordan_projection(g);
        axis_bad += usize::from(!ok);
        let plus = attracting_flag(g, 32).unwrap();
        cyl_bad += usize::from(!u_cylinder_contains(&x, &g.act(&x), &plus).unwrap());
    }
    (
        outcome(
            axis_bad == 0,
            format!("{axis_bad}/{AXIS_ELEMENTS} failures"),
        ),
        outcome(cyl_bad == 0, format!("{cyl_bad}/{AXIS_ELEMENTS} failures")),
    )
}

fn c7() -> Outcome {
    let p = p2();
    let r = &mut rng(SEED + 7);
    let o = Vertex::standard(p);
    // n·‖cartan(gⁿ)/n − jordan(g)‖∞
    let deviation = |g: &GroupElement, n: i64| -> Rational64 {
        let c = cartan_projection(&g.pow(n), &o).unwrap();
        c.sup_distance(&jordan_projection(g).scale(Rational64::from(n)))
    };
    let sample: Vec<GroupElement> = (0..LIMIT_ELEMENTS)
        .map(|_| random_type_preserving(r, p, -2, 2))
        .collect();
    let c = sample
        .iter()
        .flat_map(|g| (1..=LIMIT_CALIBRATION).map(move |n| (g, n)))
        .map(|(g, n)| deviation(g, n))
        .max()
        .unwrap();
    let at: Vec<Rational64> = sample.iter().map(|g| deviation(g, LIMIT_N)).collect();
    let worst = *at.iter().max().unwrap();
    let above3 = at.iter().filter(|&&d| d > Rational64::from(3)).count();
    outcome(
        worst <= c,
        format!(
            "C = {c} from n <= {LIMIT_CALIBRATION}; max n*deviation at n = {LIMIT_N} is {worst}, {above3}/{LIMIT_ELEMENTS} above 3"
        ),
    )
}

struct Runs {
    proportion: Vec<(String, Vec<u8>)>,
    opposite: Vec<(String, Vec<u8>)>,
    converge: Vec<(String, Vec<u8>)>,
    free_cert: (i32, Vec<(String, Vec<u8>)>),
}

fn runs(dir: &Path, workers: usize) -> Runs {
    let d = |name: &str| dir.join(format!("{name}-{workers}"));
    Runs {
        proportion: cli(&["proportion"], "default.toml", &d("proportion"), workers).1,
        opposite: cli(&["opposite"], "default.toml", &d("opposite"), workers).1,
        converge: cli(&["converge"], "default.toml", &d("converge"), workers).1,
        free_cert: cli(&["free-cert"], "free_cert.toml", &d("free-cert"), workers),
    }
}

fn c8(r: &Runs) -> Outcome {
    let rows = report(&r.proportion)["result"]["rows"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    let counts: Vec<(u64, u64, u64)> = rows
        .iter()
        .map(|row| {
            (
                row["n"].as_u64().unwrap(),
                row["srh_count"].as_u64().unwrap(),
                row["trials"].as_u64().unwrap(),
            )
        })
        .collect();
    let grid_ok =
        counts.iter().map(|c| c.0).eq([10, 25, 50, 100]) && counts.iter().all(|c| c.2 == 500);
    let frac = |c: &(u64, u64, u64)| c.1 as f64 / c.2 as f64;
    let monotone = counts
        .windows(2)
        .all(|w| frac(&w[1]) >= wilson_low(w[0].1, w[0].2));
    let last = counts.last().map(frac).unwrap_or(0.0);
    let shown: Vec<String> = counts.iter().map(|c| format!("{:.3}", frac(c))).collect();
    outcome(
        grid_ok && monotone && last >= MIN_SRH_FRACTION,
        format!(
            "fractions {} at n = 10,25,50,100; monotone within bands: {monotone}",
            shown.join(", ")
        ),
    )
}

fn c9(r: &Runs) -> Outcome {
    let res = &report(&r.opposite)["result"];
    let (k, n) = (
        res["global_opposite"].as_u64().unwrap(),
        res["trials"].as_u64().unwrap(),
    );
    let germ = res["germ_opposite"].as_u64().unwrap();
    let f = k as f64 / n as f64;
    outcome(
        n == 500 && f >= MIN_OPPOSITE_FRACTION,
        format!("opposite at n = 100 in {k}/{n} ({f:.3}); germ-level proxy {germ}/{n}"),
    )
}

fn c10(r: &Runs) -> Outcome {
    let res = &report(&r.converge)["result"];
    let (k, n) = (
        res["stabilized"].as_u64().unwrap(),
        res["trials"].as_u64().unwrap(),
    );
    let f = k as f64 / n as f64;
    outcome(
        n == 500 && f >= MIN_STABILIZED_FRACTION,
        format!(
            "stabilized by n = 100 in {k}/{n} ({f:.3}), horizon {}",
            res["horizon"]
        ),
    )
}

fn c11(r: &Runs, dir: &Path) -> Outcome {
    let (code, files) = &r.free_cert;
    let cert = &report(files)["result"]["certificate"];
    let power = cert["power"].as_u64().unwrap_or(0);
    let words = cert["word_check"]["words_at_depth"].as_u64().unwrap_or(0);
    let depth = cert["word_check"]["depth"].as_u64().unwrap_or(0);
    let pass = *code == 0
        && cert["verdict"] == "pass"
        && power <= MAX_POWER
        && depth == 8
        && words == WORDS_AT_DEPTH_8;

    let (_, body) = files.iter().find(|(n, _)| n == "certificate.json").unwrap();
    let clean = dir.join("certificate.json");
    fs::write(&clean, body).unwrap();
    let mut tampered: Value = serde_json::from_slice(body).unwrap();
    tampered["word_check"]["words_at_depth"] = Value::from(words + 1);
    let bad = dir.join("tampered.json");
    fs::write(&bad, serde_json::to_vec_pretty(&tampered).unwrap()).unwrap();
    let verify = |path: &Path| {
        Command::new(env!("CARGO_BIN_EXE_a2walk"))
            .arg("verify")
            .arg(path)
            .output()
            .unwrap()
            .status
            .code()
    };
    let (vc, vt) = (verify(&clean), verify(&bad));
    outcome(
        pass && vc == Some(0) && vt == Some(2),
        format!(
            "N = {power}, L = {depth}, {words} words at depth, zero collisions, exit {code}; verify exit {vc:?}, tampered exit {vt:?}"
        ),
    )
}

fn c12(dir: &Path) -> Outcome {
    let (code_fixed, files) = cli(&["fixed-point"], "fixed_point.toml", &dir.join("fp"), 1);
    let fixed = &report(&files)["result"]["result"];
    let (code_hyp, files) = cli(
        &["fixed-point"],
        "fixed_point_hyperbolic.toml",
        &dir.join("fph"),
        1,
    );
    let witness = &report(&files)["result"]["result"];
    let pass = code_fixed == 0
        && fixed["verdict"] == "fixed_vertex"
        && fixed["distance"] == 0
        && code_hyp == 2
        && witness["verdict"] == "hyperbolic_witness";
    outcome(
        pass,
        format!(
            "permutations: {} at radius {}, exit {code_fixed}; with diag(4,2,1): {} {}, exit {code_hyp}",
            fixed["verdict"], fixed["distance"], witness["verdict"], witness["word"]
        ),
    )
}

fn c13(a: &Runs, b: &Runs) -> Outcome {
    let same = [
        (&a.proportion, &b.proportion),
        (&a.opposite, &b.opposite),
        (&a.converge, &b.converge),
        (&a.free_cert.1, &b.free_cert.1),
    ]
    .iter()
    .all(|(x, y)| !x.is_empty() && x == y)
        && a.free_cert.0 == b.free_cert.0;
    let files: usize = [&a.proportion, &a.opposite, &a.converge, &a.free_cert.1]
        .iter()
        .map(|f| f.len())
        .sum();
    outcome(
        same,
        format!("{files} JSON/CSV files byte-identical at 1 and 4 workers"),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(&str, Duration, Duration, Outcome)> = Vec::new();
    let mut timed = |id: &'static str, limit: u64, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let el = start.elapsed();
        print_line(id, el, Duration::from_secs(limit), &o);
        results.push((id, el, Duration::from_secs(limit), o));
    };
    timed("C1 vector distance = Smith oracle", 10, &mut c1);
    timed("C2 opposition involution and types", 1, &mut c2);
    timed("C3 residue of PG(2,2)", 1, &mut c3);
    timed("C4 criterion soundness", 60, &mut c4);
    let start = Instant::now();
    let (o5, o6) = c5_c6();
    let el = start.elapsed();
    print_line("C5 axis completeness", el, Duration::from_secs(120), &o5);
    print_line("C6 cylinder condition", el, Duration::from_secs(120), &o6);
    results.push(("C5", el, Duration::from_secs(120), o5));
    results.push(("C6", el, Duration::from_secs(120), o6));
    let mut timed = |id: &'static str, limit: u64, el: Duration, o: Outcome| {
        print_line(id, el, Duration::from_secs(limit), &o);
        results.push((id, el, Duration::from_secs(limit), o));
    };
    let start = Instant::now();
    let o7 = c7();
    timed("C7 Jordan-Cartan limit", 120, start.elapsed(), o7);

    let start = Instant::now();
    let single = runs(dir.path(), 1);
    let el = start.elapsed();
    timed("C8 strongly regular proportion", 600, el, c8(&single));
    timed("C9 opposite pairs", 600, el, c9(&single));
    timed("C10 germ stabilization", 600, el, c10(&single));
    let start = Instant::now();
    let o11 = c11(&single, dir.path());
    timed("C11 free certificate", 300, el + start.elapsed(), o11);
    let start = Instant::now();
    let o12 = c12(dir.path());
    timed("C12 fixed point", 10, start.elapsed(), o12);
    let start = Instant::now();
    let multi = runs(dir.path(), 4);
    let o13 = c13(&single, &multi);
    timed("C13 determinism across workers", 600, start.elapsed(), o13);

    let failed = results
        .iter()
        .filter(|(_, el, limit, o)| !o.pass || el > limit)
        .count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn print_line(id: &str, el: Duration, limit: Duration, o: &Outcome) {
    let verdict = if o.pass && el <= limit {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "[{verdict}] {id}: {} ({:.1}s, limit {}s)",
        o.detail,
        el.as_secs_f64(),
        limit.as_secs()
    );
}
