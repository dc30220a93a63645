//! Acceptance suite: one line per criterion, exit status 0 iff every
//! criterion is green or red exactly as pinned in KNOWN_RED.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use workbench::deligne::{canonicalize, check_lifting_grid, ExtLabel};
use workbench::fusion::{self, InstanceReport};
use workbench::gring::{check_ring_axioms, lambda_p, GRing};
use workbench::modular;
use workbench::qmodules::{check_ses_loewy, WeightModule};
use workbench::qseries::{check_qh_identity, check_sigma_relations};
use workbench::report::CheckReport;
use workbench::ribbon::{check_hopf_closed_forms, hopf_pairs};
use workbench::scalars::{conductor_for, conductor_scope, q, qi, CycScalar};

const DEN_BOUND: i64 = 4;
const SERIES_CUTOFF: i64 = 10;
const ABEL_R: f64 = 1.0 - 1e-3;
const ABEL_TOL: f64 = 1e-6;

/// Listed p=3 braiding scalars that disagree with the computed braiding,
/// as (rule, left factor, right factor, summand). The analysis and the
/// corrected values are in notes/decisions.md under Fusion.
const KNOWN_RED: &[(&str, &str, &str, &str)] = &[
    ("p3 ES(1) x ES(1)", "ES(c=1,i=1,l=0)", "ES(c=1,i=1,l=0)", "ES(c=2,i=0,l=0)"),
    ("p3 ES(1) x ES(1)", "ES(c=1,i=1,l=0)", "ES(c=-1,i=1,l=0)", "ES(c=0,i=0,l=0)"),
    ("p3 ES(1) x ES(1)", "ES(c=0,i=1,l=1)", "ES(c=2,i=1,l=1)", "ES(c=8,i=0,l=0)"),
    ("p3 ES(1) x ES(1)", "ES(c=0,i=1,l=1)", "ES(c=0,i=1,l=1)", "ES(c=6,i=0,l=0)"),
    ("p3 EV x EV generic", "EV(c=-7/3,a=1/3)", "EV(c=-7/3,a=1/3)", "EV(c=-14/3,a=2/3)"),
    ("p3 EV x EV generic", "EV(c=-9/4,a=1/4)", "EV(c=-3/2,a=-1/2)", "EV(c=-27/4,a=11/4)"),
    ("p3 EV x EV generic", "EV(c=-7/3,a=1/3)", "EV(c=2/3,a=-2/3)", "EV(c=-14/3,a=8/3)"),
    ("p3 EV x EV, α+β ≡ 0", "EV(c=3/2,a=1/2)", "EV(c=5/2,a=-1/2)", "QP(c=4,i=0,l=0)"),
    ("p3 EV x EV, α+β ≡ 0", "EV(c=3/2,a=1/2)", "EV(c=5/2,a=-1/2)", "EV(c=1,a=3)"),
    ("p3 EV x EV, α+β ≡ 0", "EV(c=1,a=3)", "EV(c=1,a=3)", "QP(c=8,i=0,l=0)"),
    ("p3 EV x EV, α+β ≡ 0", "EV(c=1,a=3)", "EV(c=1,a=3)", "EV(c=5,a=3)"),
    ("p3 EV x EV, α+β ≡ 0", "EV(c=-7/3,a=1/3)", "EV(c=-2/3,a=8/3)", "QP(c=0,i=0,l=0)"),
    ("p3 EV x EV, α+β ≡ 0", "EV(c=-7/3,a=1/3)", "EV(c=-2/3,a=8/3)", "EV(c=-3,a=3)"),
    ("p3 EV x EV, α+β ≡ 1", "EV(c=3/2,a=1/2)", "EV(c=3/2,a=1/2)", "QP(c=3,i=1,l=0)"),
    ("p3 EV x EV, α+β ≡ 1", "EV(c=-7/3,a=1/3)", "EV(c=4/3,a=2/3)", "QP(c=-1,i=1,l=0)"),
    ("p3 EV x EV, α+β ≡ 1", "EV(c=-9/4,a=1/4)", "EV(c=1/4,a=-9/4)", "QP(c=-5,i=1,l=0)"),
    ("p3 EV x EV, α+β ≡ 2", "EV(c=-7/3,a=1/3)", "EV(c=1/3,a=5/3)", "EV(c=-5,a=3)"),
    ("p3 EV x EV, α+β ≡ 2", "EV(c=3/2,a=1/2)", "EV(c=1/2,a=3/2)", "EV(c=-1,a=3)"),
    ("p3 EV x EV, α+β ≡ 2", "EV(c=1/2,a=-1/2)", "EV(c=1/2,a=-1/2)", "EV(c=-5,a=3)"),
];

struct Outcome {
    ok: bool,
    /// criterion is red, and the red part matches the pinned list exactly
    known_red: bool,
    note: String,
}

impl Outcome {
    fn from_reports(reps: &[CheckReport]) -> Self {
        let ok = reps.iter().all(|r| r.passed());
        let total: usize = reps.iter().map(|r| r.total).sum();
        let fails: usize = reps.iter().map(|r| r.failures).sum();
        let mut note = format!("{}/{} ok", total - fails, total);
        if let Some(r) = reps.iter().find(|r| !r.passed()) {
            note.push_str(&format!("; {} witness {}", r.check, r.witness.clone().unwrap_or_default()));
        }
        Outcome { ok, known_red: false, note }
    }
}

fn require(rep: &mut CheckReport, ok: bool, what: &str) {
    rep.record(ok, || serde_json::json!(what));
}

fn c1_hopf() -> Outcome {
    let mut reps = Vec::new();
    let mut size = CheckReport::new("α-pair count");
    require(&mut size, hopf_pairs(DEN_BOUND).len() >= 10, "at least 10 α-pairs");
    reps.push(size);
    for p in 2..=5 {
        reps.push(check_hopf_closed_forms(p, DEN_BOUND));
    }
    Outcome::from_reports(&reps)
}

fn c2_lifting() -> Outcome {
    let mut reps = Vec::new();
    for p in 2..=5 {
        let r = check_lifting_grid(p, DEN_BOUND);
        let mut size = CheckReport::new(format!("grid size p={p}"));
        require(&mut size, r.total >= 200, "at least 200 objects");
        reps.push(r);
        reps.push(size);
    }
    Outcome::from_reports(&reps)
}

fn red_set(reports: &[InstanceReport]) -> BTreeSet<(String, String, String, String)> {
    let mut out = BTreeSet::new();
    for r in reports {
        for v in &r.verdicts {
            if v.present && !v.scalar_ok() {
                out.insert((r.rule.to_string(), r.lhs.0.to_string(), r.lhs.1.to_string(), v.label.to_string()));
            }
        }
    }
    out
}

fn c3_fusion() -> Outcome {
    let mut reps = Vec::new();
    let mut all = Vec::new();
    for rules in [fusion::rules_p2(), fusion::rules_p3()] {
        let mut count = CheckReport::new("instances per rule");
        for r in &rules {
            require(&mut count, r.instances.len() >= 3, r.name);
        }
        let (dec, sc, ir) = fusion::check_rules(&rules);
        // nilpotent monodromy exactly on the QP summands, listed or not
        let mut flags = CheckReport::new("nilpotent flags");
        for i in &ir {
            for s in &i.computed {
                let is_qp = matches!(s.label, ExtLabel::QP { .. });
                flags.record(s.nilpotent == is_qp, || serde_json::json!(s.label.to_string()));
            }
        }
        reps.extend([count, dec, flags]);
        all.push((sc, ir));
    }
    // tensor associativity and the blockwise Hopf link
    let mut extra = CheckReport::new("associativity and blockwise hopf");
    let es = |c: i64, i: u32| ExtLabel::ES { c: qi(c), i, ell: 0 };
    let ev = |c: Q, a: Q| ExtLabel::EV { c, alpha: a };
    type Q = workbench::Q;
    for (a, b, c, p) in [
        (es(1, 1), es(1, 1), es(-1, 1), 3),
        (es(0, 0), es(1, 1), es(1, 1), 3),
        (es(1, 1), ev(q(3, 2), q(1, 2)), es(1, 1), 3),
        (ev(q(1, 2), q(1, 2)), es(1, 0), ev(q(1, 2), q(1, 2)), 2),
    ] {
        let ok = fusion::associativity(&a, &b, &c, p).unwrap_or(false);
        extra.record(ok, || serde_json::json!([a.to_string(), b.to_string(), c.to_string()]));
    }
    for p in [2u32, 3] {
        let _g = conductor_scope(conductor_for(p, &[q(1, 2), q(1, 3)]));
        let m = WeightModule::<CycScalar>::simple(1, 0, p).unwrap();
        let n = WeightModule::<CycScalar>::typical(&q(1, 2), p).tensor(&WeightModule::typical(&q(1, 3), p)).unwrap();
        for (x, y) in [(&m, &m), (&m, &n)] {
            let ok = matches!(fusion::hopf_blockwise(x, y), Ok((w, b)) if w == b);
            extra.record(ok, || serde_json::json!({"p": p, "pair": [x.label.to_string(), y.label.to_string()]}));
        }
    }
    reps.push(extra);
    let mut out = Outcome::from_reports(&reps);
    let (sc2, _) = &all[0];
    let (sc3, ir3) = &all[1];
    let reds = red_set(ir3);
    let pinned: BTreeSet<_> = KNOWN_RED
        .iter()
        .map(|(a, b, c, d)| (a.to_string(), b.to_string(), c.to_string(), d.to_string()))
        .collect();
    let matches_pin = reds == pinned && sc3.failures == pinned.len();
    out.note = format!(
        "{}; scalars p=2 {}/{}, p=3 {}/{}",
        out.note,
        sc2.total - sc2.failures,
        sc2.total,
        sc3.total - sc3.failures,
        sc3.total
    );
    if !sc2.passed() {
        out.ok = false;
    } else if out.ok && !sc3.passed() {
        out.ok = false;
        out.known_red = matches_pin;
        if matches_pin {
            out.note.push_str(&format!("; {} listed p=3 scalars disagree, all pinned (see notes/decisions.md)", pinned.len()));
        } else {
            let extra: Vec<_> = reds.symmetric_difference(&pinned).take(3).collect();
            out.note.push_str(&format!("; red set differs from the pin: {extra:?}"));
        }
    }
    out
}

fn c4_ses() -> Outcome {
    let reps: Vec<_> = (2..=5).map(|p| check_ses_loewy(p, DEN_BOUND)).collect();
    Outcome::from_reports(&reps)
}

fn c5_typical() -> Outcome {
    let mut reps = Vec::new();
    for p in 2..=5 {
        let grid = modular::typical_grid(p);
        let mut size = CheckReport::new(format!("grid size p={p}"));
        require(&mut size, grid.len() >= 50, "at least 50 index pairs");
        reps.push(modular::check_typical_comparison(p, &grid));
        reps.push(size);
    }
    Outcome::from_reports(&reps)
}

fn c6_atypical() -> Outcome {
    let mut reps = Vec::new();
    for p in [3u32, 5, 7] {
        let mut rep = CheckReport::new(format!("verlinde p={p}"));
        require(&mut rep, lambda_p(p).len() as u32 == p * (p - 1) / 2, "|Λ_p|");
        match modular::verlinde_n(p) {
            Ok(v) => {
                require(&mut rep, v.invertible, "S invertible");
                require(&mut rep, v.nonnegative_integers, "N entries in Z≥0");
                require(&mut rep, v.matches_ring, "N equals the ring structure constants");
                require(&mut rep, v.consistent && v.symmetric, "column identity and symmetry");
            }
            Err(e) => rep.fail(serde_json::json!(e.to_string())),
        }
        match modular::check_atypical_comparison(p) {
            Ok(r) => reps.push(r),
            Err(e) => rep.fail(serde_json::json!(e.to_string())),
        }
        reps.push(rep);
    }
    Outcome::from_reports(&reps)
}

fn c7_even() -> Outcome {
    let mut reps = Vec::new();
    for p in [2u32, 4] {
        let mut rep = CheckReport::new(format!("even-p verlinde p={p}"));
        match modular::check_even_p(p) {
            Ok((table, v)) => {
                require(&mut rep, v.consistent, "column identity");
                require(&mut rep, v.rank as u32 == p * (p - 1) / 2, "rank p(p−1)/2");
                reps.push(table);
            }
            Err(e) => rep.fail(serde_json::json!(e.to_string())),
        }
        reps.push(rep);
    }
    Outcome::from_reports(&reps)
}

fn c8_qh() -> Outcome {
    let mut reps = Vec::new();
    for p in 3..=5 {
        match check_qh_identity(p, &qi(SERIES_CUTOFF)) {
            Ok((r, _)) => reps.push(r),
            Err(e) => {
                let mut r = CheckReport::new(format!("qh p={p}"));
                r.fail(serde_json::json!(e.to_string()));
                reps.push(r);
            }
        }
    }
    Outcome::from_reports(&reps)
}

fn c9_sigma() -> Outcome {
    let mut reps = Vec::new();
    for p in 2..=5 {
        match check_sigma_relations(p, &qi(SERIES_CUTOFF)) {
            Ok(r) => reps.push(r),
            Err(e) => {
                let mut r = CheckReport::new(format!("sigma p={p}"));
                r.fail(serde_json::json!(e.to_string()));
                reps.push(r);
            }
        }
    }
    Outcome::from_reports(&reps)
}

fn c10_abel() -> Outcome {
    let mut reps = Vec::new();
    for p in [2u32, 3] {
        let nus = modular::abel_nus(p, 12);
        let mut size = CheckReport::new(format!("ν' count p={p}"));
        require(&mut size, nus.len() >= 10, "at least 10 values");
        reps.push(modular::abel_oracle(p, &nus, ABEL_R, ABEL_TOL));
        reps.push(size);
    }
    Outcome::from_reports(&reps)
}

fn c11_properties() -> Outcome {
    let mut reps = Vec::new();
    let mut rel = CheckReport::new("module relations");
    for p in 2..=5u32 {
        let _g = conductor_scope(conductor_for(p, &[q(1, 2), q(1, 3), q(1, 4)]));
        let mut ms: Vec<WeightModule<CycScalar>> = Vec::new();
        for ell in -2..=2 {
            ms.extend((0..p).map(|i| WeightModule::simple(i, ell, p).unwrap()));
            ms.push(WeightModule::one_dim(ell, p));
        }
        for a in [q(1, 2), q(-1, 3), q(3, 4), qi(0), qi(1), qi(p as i64 + 1)] {
            ms.push(WeightModule::typical(&a, p));
        }
        ms.extend((0..p - 1).map(|i| WeightModule::projective(i, 0, p).unwrap()));
        let base = ms.len();
        for k in 0..base.min(6) {
            ms.push(ms[k].dual());
            ms.push(ms[k].tensor(&ms[base - 1 - k]).unwrap());
        }
        for m in &ms {
            rel.record(m.check_relations().is_ok(), || serde_json::json!({"p": p, "module": m.label.to_string()}));
        }
    }
    reps.push(rel);
    for p in [3u32, 5] {
        match modular::homomorphism_check(&GRing::new(p)) {
            Ok(r) => reps.push(r),
            Err(e) => {
                let mut r = CheckReport::new(format!("homomorphism p={p}"));
                r.fail(serde_json::json!(e.to_string()));
                reps.push(r);
            }
        }
    }
    for p in 2..=5 {
        reps.push(check_ring_axioms(&GRing::new(p)));
    }
    for p in [2u32, 4] {
        reps.push(check_ring_axioms(&GRing::even0(p).unwrap()));
    }
    let mut can = CheckReport::new("canonicalize idempotence");
    for p in 2..=5u32 {
        let mut labels = Vec::new();
        for c in -6..=6i64 {
            for ell in -2..=2 {
                for i in 0..p.saturating_sub(1) {
                    labels.push(ExtLabel::ES { c: qi(c), i, ell });
                    labels.push(ExtLabel::QP { c: qi(c), i, ell });
                }
            }
            for a in [q(1, 2), q(-7, 3), q(9, 4), qi(3 * p as i64), qi(-(p as i64))] {
                labels.push(ExtLabel::EV { c: qi(c) + q(1, 4), alpha: a });
            }
        }
        for l in &labels {
            let once = canonicalize(l, p);
            can.record(canonicalize(&once, p) == once, || serde_json::json!({"p": p, "label": l.to_string()}));
        }
    }
    reps.push(can);
    Outcome::from_reports(&reps)
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: &[Criterion] = &[
        (1, "hopf-link closed forms", 5, c1_hopf),
        (2, "lifting criterion", 10, c2_lifting),
        (3, "fusion tables", 60, c3_fusion),
        (4, "ses and loewy data", 30, c4_ses),
        (5, "typical comparison", 10, c5_typical),
        (6, "atypical comparison and verlinde", 120, c6_atypical),
        (7, "even-p table", 60, c7_even),
        (8, "qh character identity", 90, c8_qh),
        (9, "sigma relations", 120, c9_sigma),
        (10, "abel regularization", 5, c10_abel),
        (11, "algebraic properties", 60, c11_properties),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = 0;
    for (n, name, budget, f) in criteria {
        if only.is_some_and(|o| o != *n) {
            continue;
        }
        let t = Instant::now();
        let out = f();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(*budget);
        let (tag, bad) = match (out.ok && in_time, out.known_red) {
            (true, _) => ("PASS", false),
            (false, true) if in_time => ("FAIL", false),
            _ => ("FAIL", true),
        };
        let pin = if out.known_red && !bad { " [known red, pinned]" } else { "" };
        let slow = if in_time { String::new() } else { format!(" over budget {budget}s") };
        println!("criterion {n:>2} {tag} {name} ({:.2}s){slow}{pin}: {}", dt.as_secs_f64(), out.note);
        if bad {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed outside the pinned list");
        std::process::exit(1);
    }
}
