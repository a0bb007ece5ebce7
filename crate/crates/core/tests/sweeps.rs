use krawtchouk::arith::Rational;
use krawtchouk::expansion::PsiBound;
use krawtchouk::verify::{
    uniform_sweep, Claim, ConvergenceReport, GridSpec, Sampling, SweepConfig, Verdict,
    SCHEMA_VERSION,
};

fn config(p: (i64, i64)) -> SweepConfig {
    SweepConfig {
        p: Rational::from(p),
        grid: GridSpec::powers_of_two(10, 16).unwrap(),
        ..SweepConfig::default()
    }
}

#[test]
fn report_json_round_trips_with_sorted_keys() {
    let r = uniform_sweep(
        Claim::ClassicalLimit,
        &SweepConfig {
            n: 2,
            ..config((3, 10))
        },
    )
    .unwrap();
    let json = r.to_json().unwrap();
    let back: ConvergenceReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.schema_version, SCHEMA_VERSION);
    assert_eq!(back.rows, r.rows);
    assert!(!json.contains("wall_time_ms"));
    let keys: Vec<_> = json
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap().to_string())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn csv_report_columns() {
    let r = uniform_sweep(
        Claim::Sharapudinov,
        &SweepConfig {
            n: 2,
            ..config((3, 10))
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "N,residual,weighted_residual,exact"
    );
    assert_eq!(text.lines().count(), 1 + 7);
}

#[test]
fn sharapudinov_rate_away_from_the_centre() {
    let cfg = SweepConfig {
        n: 3,
        sampling: Sampling::FixedX(Rational::from((1, 2))),
        ..config((3, 10))
    };
    let r = uniform_sweep(Claim::Sharapudinov, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.fit);
}

#[test]
fn density_derivatives_converge() {
    for r in 0..=2 {
        let cfg = SweepConfig {
            m: 1,
            r,
            points_per_unit: 8,
            precision_check: false,
            ..config((3, 10))
        };
        let rep = uniform_sweep(Claim::Thm1Diff, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "r = {r}: {:?}", rep.fit);
    }
}

#[test]
fn literal_psi_bound_loses_half_an_order() {
    let base = SweepConfig {
        n: 2,
        m: 1,
        sampling: Sampling::FixedX(Rational::from((3, 5))),
        ..config((3, 10))
    };
    let matched = uniform_sweep(Claim::Thm2, &base).unwrap();
    let literal = uniform_sweep(
        Claim::Thm2,
        &SweepConfig {
            psi_bound: PsiBound::Literal,
            ..base
        },
    )
    .unwrap();
    let (sm, sl) = (matched.slope().unwrap(), literal.slope().unwrap());
    assert!(sm <= -0.5, "matched slope {sm}");
    assert!(sl - sm > 0.4, "literal slope {sl} vs matched {sm}");
    assert_eq!(literal.verdict, Verdict::Fail);
}

#[test]
fn shifted_closed_form_orders() {
    for i in 0..=2 {
        let cfg = SweepConfig {
            n: 3,
            i,
            ..config((1, 3))
        };
        let r = uniform_sweep(Claim::Cor2, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "i = {i}: {:?}", r.fit);
    }
}
