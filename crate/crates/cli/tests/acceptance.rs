use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use dyadint_core::bridge::{equivalence_report, PartitionSchedule};
use dyadint_core::calculus::{fubini_check, newton_leibniz_check, FubiniDomain};
use dyadint_core::expr::parse;
use dyadint_core::geometry::{DyadicBox, DyadicRational};
use dyadint_core::integrator::{
    dyadic_sums, integrate, is_very_small, DyadicSumReport, IntegrateOptions, LevelSums, Row, Strategy,
};
use dyadint_core::oracle::{self, ExprOracle, Oracle, Region};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + seed)
}

fn expr_oracle(src: &str, support: DyadicBox) -> Oracle {
    Arc::new(ExprOracle::new(parse(src, support.dim()).unwrap(), support).unwrap())
}

/// Uniform sums at every level up to `k`, without an early stop.
fn all_levels(o: &Oracle, k: u32) -> DyadicSumReport {
    let opts = IntegrateOptions::new(o.dim()).strategy(Strategy::Uniform).epsilon(f64::MIN_POSITIVE).k_max(k);
    integrate(o.as_ref(), &opts).unwrap()
}

/// Row at level `k`, or the last row if the sums became exact earlier.
fn row(r: &DyadicSumReport, k: u32) -> &Row {
    r.rows.iter().rev().find(|row| row.k <= k).expect("level 0 is always computed")
}

fn random_expr(rng: &mut ChaCha8Rng, dim: usize, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.75) {
            format!("x{}", rng.gen_range(1..=dim))
        } else {
            ["0.5", "2", "1/3", "0.1", "3"].choose(rng).unwrap().to_string()
        };
    }
    let mut sub = || random_expr(rng, dim, depth - 1);
    let (a, b) = (sub(), sub());
    match rng.gen_range(0..13) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 => format!("({a} * {b})"),
        3 => format!("min({a}, {b})"),
        4 => format!("max({a}, {b})"),
        5 => format!("({a} / (1 + ({b})^2))"),
        6 => format!("abs({a})"),
        7 => format!("sin({a})"),
        8 => format!("cos({a})"),
        9 => format!("exp(min({a}, 2))"),
        10 => format!("sqrt(({a})^2 + 1)"),
        11 => format!("({a})^2"),
        _ => format!("-({a})^3"),
    }
}

/// Box with endpoints on the `2^-e` grid inside `[-2, 2)^dim`.
fn random_dyadic_box(rng: &mut ChaCha8Rng, dim: usize, e: u32) -> (DyadicBox, DyadicRational) {
    let n = 1i64 << e;
    let mut bounds = Vec::new();
    let mut vol = DyadicRational::one();
    for _ in 0..dim {
        let lo = rng.gen_range(-2 * n..2 * n - 1);
        let hi = rng.gen_range(lo + 1..=2 * n);
        bounds.push((lo as f64 / n as f64, hi as f64 / n as f64));
        vol = &vol * &DyadicRational::new(hi - lo, e);
    }
    (DyadicBox::semiclosed(&bounds).unwrap(), vol)
}

fn exact_at(r: &DyadicSumReport, k: u32, want: f64) -> bool {
    let row = row(r, k);
    row.lower == want && row.upper == want && row.enclosure().contains(want)
}

fn cube_indicators() -> Outcome {
    let mut rng = rng(1);
    let mut bad = Vec::new();
    for i in 0..50 {
        let dim = [1, 2, 3][i % 3];
        let k = rng.gen_range(0..=8u32);
        let corner: Vec<i64> = (0..dim).map(|_| rng.gen_range(-20..20)).collect();
        let h = 0.5f64.powi(k as i32);
        let bounds: Vec<(f64, f64)> = corner.iter().map(|&c| (c as f64 * h, (c + 1) as f64 * h)).collect();
        let ind = oracle::indicator(Region::from_box(DyadicBox::semiclosed(&bounds).unwrap()));
        let r = all_levels(&ind, k);
        let want = DyadicRational::pow2_neg(k * dim as u32).to_f64();
        if !(exact_at(&r, k, want) && row(&r, k).gap() == 0.0) {
            bad.push(format!("m={dim} k={k} corner={corner:?}"));
        }
    }
    verdict(bad, "50/50 cube indicators exact with gap 0 at their level")
}

fn rectangles() -> Outcome {
    let mut rng = rng(2);
    let mut bad = Vec::new();
    for i in 0..50 {
        let dim = [1, 2, 3][i % 3];
        let e = rng.gen_range(0..=6u32);
        let (b, vol) = random_dyadic_box(&mut rng, dim, e);
        let r = all_levels(&oracle::indicator(Region::from_box(b)), e);
        if !(exact_at(&r, e, vol.to_f64()) && row(&r, e).gap() == 0.0) {
            bad.push(format!("dyadic rectangle m={dim} e={e}"));
        }
    }
    let k = 12;
    let mut worst = 0.0f64;
    for i in 0..20 {
        let dim = 1 + i % 2;
        let mut sides = Vec::new();
        let mut hull = Vec::new();
        let mut constraints = Vec::new();
        for j in 1..=dim {
            let a = rng.gen_range(-9000i64..8000);
            let b = rng.gen_range(a + 1..=9000);
            let (a_s, b_s) = (format!("{}", a as f64 / 1e4), format!("{}", b as f64 / 1e4));
            constraints.push((format!("{a_s} - x{j}"), false));
            constraints.push((format!("x{j} - {b_s}"), false));
            sides.push((b - a) as f64 / 1e4);
            hull.push(((a as f64 / 1e4 * 8.0).floor() / 8.0, (b as f64 / 1e4 * 8.0).ceil() / 8.0));
        }
        let refs: Vec<(&str, bool)> = constraints.iter().map(|(s, f)| (s.as_str(), *f)).collect();
        let region = Region::parse(DyadicBox::closed(&hull).unwrap(), &refs).unwrap();
        let r = all_levels(&oracle::indicator(region), k);
        let vol: f64 = sides.iter().product();
        let surface = if dim == 1 { 2.0 } else { 2.0 * (sides[0] + sides[1]) };
        let last = row(&r, k);
        let bound = 4.0 * surface * 0.5f64.powi(k as i32);
        worst = worst.max(last.gap() / bound);
        let e = last.enclosure();
        if !(e.lo <= vol + 1e-12 && vol - 1e-12 <= e.hi && last.gap() <= bound) {
            bad.push(format!("decimal rectangle {constraints:?}: gap {} bound {bound}", last.gap()));
        }
    }
    verdict(
        bad,
        &format!("50 dyadic rectangles exact, 20 decimal rectangles within the surface bound (worst ratio {worst:.3})"),
    )
}

fn monotone_chain() -> Outcome {
    let mut rng = rng(3);
    let mut bad = Vec::new();
    let mut levels = 0;
    for i in 0..200 {
        let dim = 1 + i % 2;
        let src = random_expr(&mut rng, dim, 3);
        let (b, _) = random_dyadic_box(&mut rng, dim, 3);
        let k = if dim == 1 { rng.gen_range(0..=10) } else { rng.gen_range(0..=7) };
        let r = all_levels(&expr_oracle(&src, b), k);
        levels += r.rows.len();
        let tol = |a: &Row, b: &Row| a.pad + b.pad + 1e-12 * (1.0 + a.upper.abs().max(b.upper.abs()));
        let ok = r.rows.windows(2).all(|w| {
            let t = tol(&w[0], &w[1]) + 1e-12 * (w[0].lower.abs() + w[1].lower.abs());
            w[0].lower <= w[1].lower + t && w[1].upper <= w[0].upper + t
        }) && r.rows.iter().all(|row| row.lower <= row.upper + 2.0 * row.pad);
        if !ok || !r.monotonicity_violations().is_empty() {
            bad.push(src);
        }
    }
    verdict(bad, &format!("200 random integrands, {levels} levels, no violations"))
}

fn closed_forms() -> Outcome {
    let mut bad = Vec::new();
    let x = expr_oracle("x1", DyadicBox::parse("[0,1)").unwrap());
    let r = all_levels(&x, 20);
    for k in 0..=20u32 {
        let row = row(&r, k);
        let h = 0.5f64.powi(k as i32);
        let (l, u) = ((1.0 - h) / 2.0, (1.0 + h) / 2.0);
        if (row.lower - l).abs() > 2.0 * row.pad || (row.upper - u).abs() > 2.0 * row.pad {
            bad.push(format!("x at k={k}: [{}, {}] vs [{l}, {u}]", row.lower, row.upper));
        }
        if k <= 6 {
            let n = 1i64 << k;
            let mut lower = DyadicRational::zero();
            let mut upper = DyadicRational::zero();
            for i in 0..n {
                lower = &lower + &DyadicRational::new(i, 2 * k);
                upper = &upper + &DyadicRational::new(i + 1, 2 * k);
            }
            if lower.to_f64() != l || upper.to_f64() != u || row.lower != l || row.upper != u {
                bad.push(format!("x at k={k} disagrees with the exact sum"));
            }
        }
    }
    let xy = expr_oracle("x1*x2", DyadicBox::parse("[0,1)x[0,1)").unwrap());
    let opts = IntegrateOptions::new(2).strategy(Strategy::Uniform).epsilon(1e-3).k_max(10);
    let r = integrate(xy.as_ref(), &opts).unwrap();
    if !(r.verdict.is_integrable() && r.enclosure().contains(0.25)) {
        bad.push(format!("xy: {:?}", r.verdict));
    }
    let sq = expr_oracle("x1^2", DyadicBox::parse("[0,1)").unwrap());
    let opts = IntegrateOptions::new(1).strategy(Strategy::Uniform).epsilon(1e-4).k_max(14);
    let r = integrate(sq.as_ref(), &opts).unwrap();
    if !(r.verdict.is_integrable() && r.enclosure().contains(1.0 / 3.0)) {
        bad.push(format!("x^2: {:?}", r.verdict));
    }
    verdict(bad, "x for k <= 20, xy by k = 10, x^2 by k = 14")
}

fn disk() -> Outcome {
    let start = Instant::now();
    let r = all_levels(&oracle::indicator(disk_region()), 9);
    let secs = start.elapsed().as_secs_f64();
    let last = row(&r, 9);
    let e = last.enclosure();
    let msg = format!("[{}, {}], gap {:.4} in {secs:.2} s", e.lo, e.hi, last.gap());
    if e.contains(std::f64::consts::PI) && last.gap() <= 0.05 && secs < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn disk_region() -> Region {
    Region::parse(DyadicBox::parse("[-1,1]x[-1,1]").unwrap(), &[("x1^2 + x2^2 - 1", false)]).unwrap()
}

fn sine_region() -> Region {
    Region::from_json(&std::fs::read_to_string(data("sine_graph.json")).unwrap()).unwrap()
}

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn very_small() -> Outcome {
    let mut bad = Vec::new();
    let sine = all_levels(&oracle::indicator(sine_region()), 10);
    let cover = row(&sine, 10).enclosure().hi;
    if cover > 0.02 {
        bad.push(format!("sine graph cover {cover}"));
    }
    let point = Region::from_box(DyadicBox::closed(&[(0.375, 0.375), (-0.5, -0.5)]).unwrap());
    let r = all_levels(&oracle::indicator(point), 10);
    for row in &r.rows {
        if row.enclosure().hi > 0.25f64.powi(row.k as i32) {
            bad.push(format!("point at k={}: {}", row.k, row.upper));
        }
    }
    let square = Region::from_box(DyadicBox::parse("[0,1)x[0,1)").unwrap());
    let r = all_levels(&oracle::indicator(square.clone()), 10);
    if r.rows.iter().any(|row| row.upper != 1.0) {
        bad.push("full square has U_k != 1".into());
    }
    let opts = IntegrateOptions::new(2).epsilon(0.5).k_max(10);
    if is_very_small(&square, &opts).unwrap().very_small {
        bad.push("full square tested very small".into());
    }
    verdict(bad, &format!("sine graph U_10 = {cover:.5}, point U_k <= 4^-k, square U_k = 1"))
}

fn fubini_corpus() -> Outcome {
    let unit = || FubiniDomain::Box(DyadicBox::parse("[0,1)x[0,1)").unwrap());
    let triangle = Region::from_json(&std::fs::read_to_string(data("triangle.json")).unwrap()).unwrap();
    let graph = |outer: &str, u: &str, v: &str| {
        let outer = DyadicBox::parse(outer).unwrap();
        let m = outer.dim() + 1;
        FubiniDomain::Graph { outer, u: parse(u, m).unwrap(), v: parse(v, m).unwrap() }
    };
    let cases: Vec<(&str, FubiniDomain)> = vec![
        ("x1*x2", unit()),
        ("x1 + x2", unit()),
        ("1", unit()),
        ("x1^2*x2", unit()),
        ("sin(x1)*cos(x2)", unit()),
        ("exp(x1 - x2)", unit()),
        ("abs(x1 - x2)", unit()),
        ("max(x1, x2)", unit()),
        ("sqrt(x1 + x2 + 1)", unit()),
        ("x1*x2 + 1", FubiniDomain::Box(DyadicBox::parse("[-1,1)x[0,2)").unwrap())),
        ("1", FubiniDomain::Region(triangle.clone())),
        ("x1", FubiniDomain::Region(triangle.clone())),
        ("x1*x2", FubiniDomain::Region(triangle)),
        ("1", FubiniDomain::Region(disk_region())),
        ("x1^2", FubiniDomain::Region(disk_region())),
        ("x2^2 + 1", FubiniDomain::Region(disk_region())),
        ("x1*x2", graph("[0,1]", "0", "x1")),
        ("1", graph("[-1,1]", "-sqrt(1 - x1^2)", "sqrt(1 - x1^2)")),
        ("x1 + x2", graph("[0,2]", "x1 - 1", "1 + sin(x1)")),
        ("1", graph("[0,1]x[0,1]", "0", "x1 + x2")),
    ];
    let mut bad = Vec::new();
    let mut swapped = 0;
    for (src, domain) in &cases {
        let m = match domain {
            FubiniDomain::Box(b) => b.dim(),
            FubiniDomain::Region(r) => r.dim(),
            FubiniDomain::Graph { outer, .. } => outer.dim() + 1,
        };
        let opts = if m == 2 {
            IntegrateOptions::new(2).epsilon(0.02).k_max(8)
        } else {
            IntegrateOptions::new(3).epsilon(0.1).k_max(6)
        };
        let r = fubini_check(&parse(src, m).unwrap(), domain, &opts, true).unwrap();
        if r.swapped_overlap == Some(true) {
            swapped += 1;
        }
        if !r.overlap || r.swapped_overlap != Some(true) || r.critical {
            bad.push(format!("{src} (m = {m}): overlap {} swapped {:?}", r.overlap, r.swapped_overlap));
        }
    }
    verdict(bad, &format!("{}/20 direct vs repeated, {swapped}/20 swapped", 20))
}

fn newton_leibniz() -> Outcome {
    let cases = [
        ("2*x1", "x1^2", 0.0, 0.5),
        ("cos(x1)", "sin(x1)", 0.0, 1.0),
        ("1", "x1 + 5", -0.5, 0.5),
        ("3*x1^2", "x1^3", -0.25, 0.5),
        ("exp(x1)", "exp(x1)", 0.0, 0.5),
        ("-sin(x1)", "cos(x1)", 0.25, 1.25),
        ("x1/sqrt(x1^2 + 1)", "sqrt(x1^2 + 1)", -0.5, 0.5),
        ("2*x1*cos(x1^2)", "sin(x1^2)", 0.0, 0.75),
        ("exp(x1)*(x1 + 1)", "x1*exp(x1)", 0.0, 0.5),
        ("abs(x1)", "x1*abs(x1)/2", -0.5, 0.5),
        ("4*x1^3 - 2*x1", "x1^4 - x1^2", -0.5, 0.5),
        ("1/x1^2", "-1/x1", 1.0, 1.5),
    ];
    let opts = IntegrateOptions::new(1).epsilon(1e-6);
    let mut bad = Vec::new();
    for (g, f, a, b) in cases {
        let r = newton_leibniz_check(&parse(g, 1).unwrap(), &parse(f, 1).unwrap(), a, b, &opts).unwrap();
        if !(r.contained && r.integral.verdict.is_integrable()) {
            bad.push(format!("{g} on [{a}, {b}): {:?}", r.integral.verdict));
        }
    }
    verdict(bad, "12/12 golden quadruples contained at epsilon 1e-6")
}

fn equivalence() -> Outcome {
    let corpus = [
        ("x1^2", "[0,1)"),
        ("abs(x1 - 1/3)", "[0,1)"),
        ("sin(3*x1)", "[0,1)"),
        ("exp(-x1)", "[0,1)"),
        ("sqrt(x1)", "[0,1)"),
        ("max(x1 - 0.3, 0)", "[0,1)"),
        ("1", "[0,1)"),
        ("x1^3 - x1", "[-1,1)"),
        ("cos(x1)^2", "[-1,1)"),
        ("min(x1, 0.7)", "[-1,1)"),
    ];
    let k = 14;
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (i, (src, support)) in corpus.iter().enumerate() {
        let o = expr_oracle(src, DyadicBox::parse(support).unwrap());
        let lo = if support.starts_with("[-") { -1.0 } else { 0.0 };
        let schedule = PartitionSchedule::standard(&[(lo, 1.0)], k, i as u64).unwrap();
        let r = equivalence_report(o.as_ref(), k, &schedule).unwrap();
        worst = worst.max(r.upper_difference / r.dyadic_gap.max(f64::MIN_POSITIVE));
        if !(r.overlap.all() && r.upper_agreement) {
            bad.push(format!("{src}: {:?}, {} vs {}", r.overlap, r.upper_difference, r.dyadic_gap));
        }
    }
    verdict(bad, &format!("10/10 families overlap, worst |closed U - U| / gap = {worst:.3}"))
}

fn sums(src: &str, support: &DyadicBox, k: u32) -> LevelSums {
    dyadic_sums(expr_oracle(src, support.clone()).as_ref(), k).unwrap()
}

fn linearity() -> Outcome {
    let mut rng = rng(10);
    let mut bad = Vec::new();
    for i in 0..200 {
        let dim = 1 + i % 2;
        let (f, g) = (random_expr(&mut rng, dim, 3), random_expr(&mut rng, dim, 3));
        let (b, _) = random_dyadic_box(&mut rng, dim, 3);
        let k = rng.gen_range(0..=if dim == 1 { 8 } else { 5 });
        let c = *[0.5, 2.0, 3.0, 0.25].choose(&mut rng).unwrap();
        let sf = sums(&f, &b, k);
        let sg = sums(&g, &b, k);
        let sum = sums(&format!("({f}) + ({g})"), &b, k);
        let neg = sums(&format!("-({f})"), &b, k);
        let scaled = sums(&format!("{c}*({f})"), &b, k);
        let negscaled = sums(&format!("-{c}*({f})"), &b, k);
        let slack = |parts: &[&LevelSums]| {
            parts.iter().map(|s| s.pad * 4.0 + 1e-12 * (1.0 + s.lower.abs() + s.upper.abs())).sum::<f64>()
        };
        let checks = [
            ("U(f+g) <= U(f) + U(g)", sum.upper <= sf.upper + sg.upper + slack(&[&sum, &sf, &sg])),
            ("L(f+g) >= L(f) + L(g)", sum.lower >= sf.lower + sg.lower - slack(&[&sum, &sf, &sg])),
            ("L(f) = -U(-f)", (sf.lower + neg.upper).abs() <= slack(&[&sf, &neg])),
            ("U(f) = -L(-f)", (sf.upper + neg.lower).abs() <= slack(&[&sf, &neg])),
            ("U(cf) = cU(f)", (scaled.upper - c * sf.upper).abs() <= c * slack(&[&sf, &scaled])),
            ("L(cf) = cL(f)", (scaled.lower - c * sf.lower).abs() <= c * slack(&[&sf, &scaled])),
            ("U(-cf) = -cL(f)", (negscaled.upper + c * sf.lower).abs() <= c * slack(&[&sf, &negscaled])),
        ];
        for (name, ok) in checks {
            if !ok {
                bad.push(format!("{name} for f = {f}, g = {g}, k = {k}"));
            }
        }
    }
    verdict(bad, "200 pairs, 1400 identities, no violations")
}

fn dyadint(threads: &str, args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_dyadint"))
        .args(["--threads", threads, "--output", "json"])
        .args(args)
        .env_remove("DYADINT_THREADS")
        .output()
        .expect("run dyadint");
    (out.status.code(), out.stdout)
}

fn determinism() -> Outcome {
    let disk = data("disk.json");
    let sine = data("sine_graph.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["integrate", "--expr", "x1*x2", "--support", "[0,1)x[0,1)", "--eps", "1e-3", "--k-max", "10"],
        vec![
            "integrate",
            "--expr",
            "x1*x2",
            "--support",
            "[0,1)x[0,1)",
            "--eps",
            "1e-3",
            "--strategy",
            "uniform",
        ],
        vec!["measure", "--region", &disk, "--eps", "0.05", "--k-max", "9", "--strategy", "uniform"],
        vec!["very-small", "--region", &sine, "--eps", "0.02", "--k-max", "10"],
        vec![
            "fubini-check",
            "--expr",
            "x1*x2",
            "--support",
            "[0,1)x[0,1)",
            "--eps",
            "0.01",
            "--k-max",
            "9",
            "--swap",
        ],
        vec!["nl-check", "--g", "cos(x1)", "--F", "sin(x1)", "--a", "0", "--b", "1.5", "--eps", "1e-6"],
        vec![
            "equivalence-report",
            "--expr",
            "abs(x1 - 1/3)",
            "--support",
            "[0,1)",
            "--k-max",
            "14",
            "--seed",
            "3",
        ],
        vec!["integrate", "--oracle", "expr \"sin(x1*x2)\" on [0,1)x[0,1) | abs", "--eps", "1e-3"],
    ];
    let mut bad = Vec::new();
    for args in &runs {
        let one = dyadint("1", args);
        let eight = dyadint("8", args);
        if one != eight || one.1.is_empty() {
            bad.push(format!("{} differs between 1 and 8 threads", args[0]));
        }
    }
    verdict(bad, &format!("{}/{} runs byte-identical at 1 and 8 threads", runs.len(), runs.len()))
}

fn verdict(bad: Vec<String>, ok: &str) -> Outcome {
    if bad.is_empty() {
        Ok(ok.to_string())
    } else {
        Err(format!("{} failures; first: {}", bad.len(), bad.join("; ")))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("cube indicators are exact", cube_indicators),
        ("rectangle volumes", rectangles),
        ("monotone brackets", monotone_chain),
        ("closed-form integrals", closed_forms),
        ("disk measure", disk),
        ("very small sets", very_small),
        ("Fubini overlap", fubini_corpus),
        ("Newton-Leibniz", newton_leibniz),
        ("equivalence of bracket families", equivalence),
        ("linearity, scaling, negation", linearity),
        ("thread-count determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:>2} {tag} {name}: {detail} ({secs:.1} s)", i + 1);
        failed += outcome.is_err() as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
