//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p fracsieve --test acceptance -- --nocapture` to see
//! every criterion line. All tolerances are pinned here, in code:
//!
//! - A1 witness certificate: exact comparison `‖α·n²‖ > δ_n`, zero tolerance;
//! - A2 oracle equivalence: cell-for-cell equality, zero tolerance;
//! - A3 cover-density bound: exact cell counting against the constant 5 —
//!   measured honestly; at the minimal effective gap the constant is
//!   *exceeded* (a forbidden segment spans (2,4] cells, not the 1-2 the
//!   constant's derivation charges), so this criterion fails by measurement
//!   and the failure message carries the analysis;
//! - A4/A5 retention and good children: certified exact lower bounds at the
//!   full ladder step (32, 2499, 2590874);
//! - A6 dimension estimate: agreement with an independent formula oracle to
//!   10 significant digits;
//! - A7 series exponent signs: exact rational arithmetic;
//! - A8 determinism, monotonicity, level bracketing, certificate round-trip.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

use fracsieve::dyadic::ln_enclosure;
use fracsieve::params::{HMode, SieveParams};
use fracsieve::report::{write_json, CertificateDoc};
use fracsieve::sequence::GrowthSequence;
use fracsieve::sieve::{
    brute_force_survivors, sieve_range, DyadicCell, SurvivorState, ZoomStrategy,
    DEFAULT_RUN_BUDGET,
};
use fracsieve::validate::{
    eggleston_estimate, lemma1_check, lemma2_report, lemma3_report, retention_check,
    sample_lemma1_triples, RetentionMethod, RetentionOutcome,
};
use fracsieve::witness::{certify, extract_witness, WitnessCertificate};
use fracsieve::{RunConfig, WindowSpec};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn square_seq() -> GrowthSequence {
    GrowthSequence::parse("poly:1,0,0").expect("n^2")
}

fn paper_params() -> SieveParams {
    SieveParams::new(ratio(2, 1)).expect("gamma 2").with_n_start(32)
}

/// The A1 configuration: γ=2, t=n², paper c, effective gaps, n ∈ [32, 10^4],
/// auto window (level 20, seeded with seed 0).
struct A1Run {
    window: DyadicCell,
    state: SurvivorState,
    alpha: fracsieve::DyadicRational,
    cert: WitnessCertificate,
}

fn a1_run() -> &'static A1Run {
    static RUN: OnceLock<A1Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let seq = square_seq();
        let params = paper_params();
        let config = RunConfig::default();
        assert_eq!(config.window, WindowSpec::Auto);
        assert_eq!(config.seed, 0);
        let window = config.resolve_window(&seq, &params).expect("auto window");
        assert_eq!(window.level, 20, "auto window is ~2^-20 wide");
        let state = sieve_range(&seq, &params, window, 32, 10_000, DEFAULT_RUN_BUDGET)
            .expect("A1 sieve");
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (alpha, _chain) =
            extract_witness(&state, ZoomStrategy::Leftmost, &mut rng).expect("extract");
        let cert = certify(&alpha, &seq, &params, 32, 10_000).expect("certify");
        A1Run { window, state, alpha, cert }
    })
}

#[test]
fn a1_witness_certificate() {
    let run = a1_run();
    let cert = &run.cert;
    // Exact per-n comparisons ‖α·n²‖ > δ_n (upper endpoint), zero tolerance.
    assert!(cert.scores.iter().all(|row| row.clears_delta));
    assert!(cert.verdict, "A1 verdict must be true");
    // min over n of n·ln n·‖α·n²‖ exceeds 1/c ≈ 0.018189: compare the exact
    // lower bound against the upper end of the 1/c enclosure.
    let target_hi = cert.target.hi().to_ratio();
    assert!(
        cert.min_score > target_hi,
        "min score {} does not clear 1/c",
        cert.min_score
    );
    let inv_c = cert.target.to_f64();
    assert!((inv_c - 0.018189277798954857).abs() < 1e-12);
    assert_eq!((cert.n_from, cert.n_to), (32, 10_000));
    assert_eq!(cert.scores.len(), 10_000 - 32 + 1);
    println!(
        "[A1] PASS — witness {}/2^{} ≈ {:.10}; min n·ln n·‖α·n²‖ ≥ {:.8} > 1/c ≈ {:.8} (argmin n = {}), verdict=true",
        run.alpha.num(),
        run.alpha.level(),
        run.alpha.to_f64(),
        cert.min_score.to_f64().unwrap_or(f64::NAN),
        inv_c,
        cert.argmin_n
    );
}

#[test]
fn a2_oracle_equivalence() {
    // Custom c = 9/20 scales the levels so l_64 <= 20 and full-interval
    // brute-force enumeration stays feasible.
    let seq = square_seq();
    let params = SieveParams::new(ratio(2, 1))
        .expect("gamma 2")
        .with_custom_c(ratio(9, 20))
        .expect("custom c")
        .with_n_start(8);
    let l64 = params.dyadic_level(&seq, 64).expect("l_64");
    assert!(l64 <= 20, "scaled parameters must keep l_64 <= 20 (got {l64})");

    let state = sieve_range(&seq, &params, DyadicCell::unit(), 8, 64, DEFAULT_RUN_BUDGET)
        .expect("A2 sieve");
    let brute = brute_force_survivors(&seq, &params, 8, 64, 25).expect("A2 brute force");
    assert_eq!(
        state.survivors(),
        &brute,
        "sieve and brute-force survivor sets must match cell for cell"
    );
    assert!(!brute.is_empty());
    assert_eq!(state.survivors().measure(), brute.measure());
    println!(
        "[A2] PASS — {} survivor cells at level {} agree cell-for-cell with enumeration (c = 9/20)",
        brute.cell_count(),
        brute.level()
    );
}

#[test]
fn a3_cover_density_bound() {
    // 100 seeded samples (n, m = h_eff(n), J) with n in [32, 200], J a
    // survivor cell from a freshly sieved window. Exact cell counting.
    let seq = square_seq();
    let params = paper_params();
    let triples =
        sample_lemma1_triples(&seq, &params, 32, 200, 100, 0).expect("A3 sampling");
    assert!(triples.len() >= 100);
    let report = lemma1_check(&seq, &params, &triples).expect("A3 measurement");
    assert_eq!(report.samples, triples.len());

    // Sharp accounting: a forbidden segment spans (2, 4] cells at level l_m,
    // so a single grid point can cover up to 5 cells of J, and the density
    // ratio is bounded by 8 — verify the measurement respects that.
    assert!(
        report.worst_ratio <= 8.0 + 1e-9,
        "measured ratio {} exceeds even the sharp bound 8",
        report.worst_ratio
    );

    if report.pass {
        println!(
            "[A3] PASS — worst μ(J∩A_m)/(δ_m·μ(J)) = {:.4} ≤ 5 over {} samples",
            report.worst_ratio, report.samples
        );
    } else {
        let worst = report
            .details
            .iter()
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
            .expect("nonempty");
        println!(
            "[A3] FAIL — worst μ(J∩A_m)/(δ_m·μ(J)) = {:.4} > 5 ({} of {} samples exceed the bound; first offender n={}, m={})",
            report.worst_ratio, report.flagged, report.samples, worst.n, worst.m
        );
    }
    assert!(
        report.pass,
        "cover-density bound 5 fails by measurement: worst ratio {:.4}, {} of {} samples \
         above 5 (e.g. n={}, m={}). This is a property of the minimal effective gap, not an \
         implementation artifact: the removal half-width δ_m spans (1,2] cells at level l_m \
         (2^(l_m) ≤ 2·t_m/δ_m), so one grid point covers up to ⌊2·D/t⌋+2 ∈ [3,5] cells while \
         the bound's derivation charges z ≤ 2 cells per point — covering a segment of width \
         2δ_m/t_m > 2·2^(-l_m) with 2 cells is impossible. The same exact counting on the toy \
         step (n,m) = (2,18) already yields 5.5865 > 5 on 80 of 512 cells. The sharp constant \
         under this geometry is 8 (verified above); measured retention (A4) stays far inside \
         its budget regardless.",
        report.worst_ratio,
        report.flagged,
        report.samples,
        report.details.iter().find(|d| d.exceeds_bound).map(|d| d.n).unwrap_or(0),
        report.details.iter().find(|d| d.exceeds_bound).map(|d| d.m).unwrap_or(0),
    );
}

/// Shared A4/A5 run: one certified pass over the full effective-ladder step
/// (32, 2499, 2590874) charging every sampled J cell.
fn retention_outcome() -> &'static RetentionOutcome {
    static OUT: OnceLock<RetentionOutcome> = OnceLock::new();
    OUT.get_or_init(|| {
        let seq = square_seq();
        let params = paper_params();
        let ladder = params.build_ladder(&seq, 32, 2).expect("ladder");
        assert_eq!(ladder.entries, vec![32, 2499, 2_590_874]);
        let step = (ladder.entries[0], ladder.entries[1], ladder.entries[2]);
        let config = RunConfig::default();
        let window = config
            .resolve_window(&seq, &params)
            .expect("auto window for retention");
        retention_check(
            &seq,
            &params,
            step,
            &window,
            RetentionMethod::CertifiedLowerBound,
            3,
            0,
        )
        .expect("retention run")
    })
}

#[test]
fn a4_retention_bound() {
    let outcome = retention_outcome();
    let report = lemma2_report(outcome);
    assert!(report.samples >= 1, "at least one J cell must meet the hypothesis");
    let bound = ratio(5, 6);
    for s in outcome.samples.iter().filter(|s| s.hypothesis_met) {
        let retention: BigRational = s.retention_exact.parse().expect("exact retention");
        assert!(
            retention >= bound,
            "retention lower bound {} below 5/6 for cell {}",
            retention,
            s.cell_index
        );
    }
    assert!(report.pass);
    println!(
        "[A4] PASS — certified retention ≥ {:.4} ≥ 5/6 across {} hypothesis-satisfying J cells \
         (step 32 → 2499 → 2590874, {} skipped)",
        report.worst_ratio, report.samples, report.skipped
    );
}

#[test]
fn a5_good_children_count() {
    let outcome = retention_outcome();
    let report = lemma3_report(outcome);
    assert!(report.samples >= 1);
    for s in outcome.samples.iter().filter(|s| s.hypothesis_met && s.r_children >= 3) {
        let threshold = (2 * s.r_children) / 3;
        assert_eq!(threshold, s.good_threshold);
        assert!(
            s.good_children >= threshold,
            "good children {} below ⌊2r/3⌋ = {} for cell {}",
            s.good_children,
            threshold,
            s.cell_index
        );
    }
    assert!(report.pass);
    println!(
        "[A5] PASS — good children ≥ ⌊2r/3⌋ in every sampled J (worst fraction {:.4}, r up to {})",
        report.worst_ratio,
        outcome.samples.iter().map(|s| s.r_children).max().unwrap_or(0)
    );
}

#[test]
fn a6_dimension_estimate_agreement() {
    let seq = square_seq();
    let params = paper_params().with_h_mode(HMode::Effective);
    let ladder = params.build_ladder(&seq, 32, 3).expect("depth-3 ladder");
    let est = eggleston_estimate(&seq, &params, &ladder).expect("estimate");
    assert!(est.valid);
    assert_eq!(est.levels, vec![23, 43, 74, 121]);

    // Independent formula oracle: recompute N_k, R_k, D_k from the levels
    // with exact big integers and certified high-precision logarithms.
    let mut r_k = BigRational::one();
    let mut oracle_d = Vec::new();
    for k in 1..est.levels.len() {
        let gap = est.levels[k] - est.levels[k - 1];
        let n_k = (BigInt::one() << gap as usize) / BigInt::from(3);
        assert!(n_k > BigInt::one(), "Eggleston needs N_k > 1");
        assert_eq!(n_k.to_string(), est.counts[k - 1], "N_{k} formula mismatch");
        r_k *= BigRational::from(n_k);
        let ln_r = ln_enclosure(&r_k, 128);
        let ln2 = ln_enclosure(&ratio(2, 1), 128);
        let d = ln_r.to_f64() / (est.levels[k] as f64 * ln2.to_f64());
        oracle_d.push(d);
    }
    assert_eq!(oracle_d.len(), est.d_k.len());
    for (k, (lib, oracle)) in est.d_k.iter().zip(&oracle_d).enumerate() {
        let rel = ((lib - oracle) / oracle).abs();
        assert!(
            rel < 1e-10,
            "D_{} disagrees with the formula oracle beyond 10 digits: {} vs {}",
            k + 1,
            lib,
            oracle
        );
    }
    // D_k positive and nondecreasing over the computed range.
    assert!(est.d_k.iter().all(|&d| d > 0.0));
    assert!(est.d_k.windows(2).all(|w| w[0] <= w[1]));
    println!(
        "[A6] PASS — D_k = {:?} matches the independent formula oracle to 10 digits; positive and nondecreasing",
        est.d_k
    );
}

#[test]
fn a7_series_exponent_signs() {
    // ω(v, ε₂) = ((1 + 1/γ + ε₂)·v − 1)(γ + 1), exact rational arithmetic.
    let params = paper_params();
    let gamma = ratio(2, 1);
    let boundary = &gamma / (&gamma + BigRational::one()); // 2/3
    let below: Vec<BigRational> = vec![
        ratio(1, 10),
        ratio(1, 4),
        ratio(1, 3),
        ratio(1, 2),
        ratio(3, 5),
        ratio(13, 20),
        ratio(333, 500),
        ratio(6659, 10_000),
    ];
    for v in &below {
        assert!(v < &boundary);
        // ε₂ = (γ/(γ+1) − v)/2 · (1/v)
        let eps2 = (&boundary - v) / ratio(2, 1) / v;
        assert!(eps2.is_positive());
        let omega = params.omega(v, &eps2);
        assert!(
            omega.is_negative(),
            "ω({v}, {eps2}) = {omega} should be negative below the boundary"
        );
    }
    // At v = γ/(γ+1) exactly: ω = ε₂·γ > 0 for any ε₂ > 0.
    for eps2 in [ratio(1, 1_000_000), ratio(1, 100), ratio(1, 1)] {
        let omega = params.omega(&boundary, &eps2);
        assert_eq!(omega, &eps2 * &gamma);
        assert!(omega.is_positive());
    }
    println!(
        "[A7] PASS — ω < 0 for {} tested v < 2/3 with paired ε₂; ω = ε₂·γ > 0 at v = 2/3",
        below.len()
    );
}

#[test]
fn a8_invariant_suites() {
    let seq = square_seq();
    let params = paper_params();
    let run = a1_run();

    // (i) Determinism: an independent, identically configured A1 run produces
    // the same witness and the same survivor statistics.
    let config = RunConfig::default();
    let window = config.resolve_window(&seq, &params).expect("window");
    assert_eq!(window, run.window);
    let state2 = sieve_range(&seq, &params, window, 32, 10_000, DEFAULT_RUN_BUDGET)
        .expect("second A1 sieve");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (alpha2, _) = extract_witness(&state2, ZoomStrategy::Leftmost, &mut rng).expect("extract");
    assert_eq!(&alpha2, &run.alpha, "identical configs must yield identical witnesses");
    assert_eq!(state2.survivors(), run.state.survivors());
    assert_eq!(state2.stats().len(), run.state.stats().len());
    for (a, b) in state2.stats().iter().zip(run.state.stats()) {
        assert_eq!(a.n, b.n);
        assert_eq!(a.cells_removed, b.cells_removed);
        assert_eq!(a.survivor_measure, b.survivor_measure);
    }

    // (ii) Survivor monotonicity (refinement-aware) on an A1-config prefix.
    let mut state = SurvivorState::fresh(window, 31);
    let mut prev = state.survivors().clone();
    for n in 32..=600 {
        state.subtract_step(&seq, &params, n).expect("step");
        assert!(
            state.survivors().subset_of(&prev),
            "survivors not monotone at n = {n}"
        );
        prev = state.survivors().clone();
    }

    // (iii) Level bracketing 2^{l_n} ≤ 2·t_n/δ_n < 2^{l_n+1}, exactly, for
    // every n in the A1 range.
    for n in 32..=10_000u64 {
        let l = params.dyadic_level(&seq, n).expect("level");
        let delta = params.delta(n).expect("delta");
        let t2 = ratio(2, 1) * BigRational::from(BigInt::from(n) * BigInt::from(n));
        let pow_l = BigRational::from(BigInt::one() << l as usize);
        let pow_l1 = BigRational::from(BigInt::one() << (l + 1) as usize);
        assert!(
            &pow_l * delta.hi().to_ratio() <= t2,
            "lower bracket fails at n = {n}"
        );
        assert!(
            t2 < &pow_l1 * delta.lo().to_ratio(),
            "upper bracket fails at n = {n}"
        );
    }

    // (iv) Certificate round-trip through JSON.
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("certificate.json");
    let doc = CertificateDoc::from_certificate(&run.cert, None);
    write_json(&path, &doc).expect("write certificate");
    let back = CertificateDoc::read(&path).expect("read certificate");
    let alpha_back = back.parse_alpha().expect("alpha");
    assert_eq!(&alpha_back, &run.alpha);
    let recert = certify(&alpha_back, &seq, &params, back.n_from, back.n_to)
        .expect("re-certify");
    assert_eq!(recert.verdict, run.cert.verdict);
    assert_eq!(recert.min_score, run.cert.min_score);
    assert_eq!(recert.argmin_n, run.cert.argmin_n);

    println!(
        "[A8] PASS — determinism, survivor monotonicity, exact level bracketing over [32, 10^4], certificate round-trip"
    );
}
