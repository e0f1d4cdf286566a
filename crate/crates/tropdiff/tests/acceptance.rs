//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. All comparisons are coefficient-exact at the stored precision.
//! Timing assertions apply to optimized builds only; run with
//! `cargo test -p tropdiff --release --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tropdiff::annulus::{
    good_coordinate, pullback, pullback_in_window, AnnulusForm, AnnulusSeries, CoordinateChange,
    Skeleton,
};
use tropdiff::complex::{grc_sides, validate, VertexId};
use tropdiff::fixtures;
use tropdiff::lifting::{datum_matches, lift, residue_correct, roundtrip, DEFAULT_WINDOW};
use tropdiff::model::{gauss_level, tropicalize};
use tropdiff::poly::{series_mul, Poly};
use tropdiff::puiseux::{GradedScalar, PuiseuxScalar};
use tropdiff::rational::{Rational, Val};
use tropdiff::torsor::{
    act, connecting_element, coordinate_reduction, gn_compose, phi_e, verify_group_law,
    FormalForm, GnElement, GradedCoordinate,
};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {:45} {} {}",
        criterion,
        if ok { "PASS" } else { "FAIL" },
        detail
    );
    assert!(ok, "{criterion}: {detail}");
}

/// Enforce runtime targets in optimized builds only.
fn check_time(criterion: &str, elapsed_s: f64, budget_s: f64) {
    let enforced = !cfg!(debug_assertions);
    println!(
        "ACCEPTANCE {:45} time {:.2}s (target {}s{})",
        criterion,
        elapsed_s,
        budget_s,
        if enforced { "" } else { ", not enforced in debug" }
    );
    if enforced {
        assert!(
            elapsed_s < budget_s,
            "{criterion} exceeded its runtime target: {elapsed_s:.2}s >= {budget_s}s"
        );
    }
}

struct FormSpec {
    form: AnnulusForm,
    gap0: Rational,
}

/// A random annulus form with dominant index `n`, a prescribed positive
/// valuation gap to every other coefficient (also over the whole skeleton),
/// and precision-24 coefficients.
fn random_form(rng: &mut ChaCha8Rng) -> FormSpec {
    let lengths = [q(1, 2), q(1, 1), q(2, 1)];
    let length = lengths[rng.gen_range(0..lengths.len())].clone();
    let skeleton = Skeleton::closed_interval(length.clone());
    let n: i64 = rng.gen_range(-4..=4);
    let lo = n.min(0) - rng.gen_range(0..=6);
    let hi = n.max(0) + rng.gen_range(0..=6);
    assert!(hi - lo + 1 <= 25);

    let prec = Val::Finite(q(24, 1));
    let small = |rng: &mut ChaCha8Rng| loop {
        let v = rng.gen_range(-5i64..=5);
        if v != 0 {
            return Rational::new(v, rng.gen_range(1..=3));
        }
    };
    let v_n = Rational::new(rng.gen_range(-4..=4), 2);
    let c_n = PuiseuxScalar::monomial(v_n.clone(), small(rng)).truncated(&prec);

    // worst valuation the dominant term takes on the skeleton
    let dom_max = {
        let at_l = &v_n + &(Rational::from_int(n) * length.clone());
        v_n.clone().max(at_l)
    };

    let mut coeffs = vec![(n, c_n)];
    let mut gap0: Option<Rational> = None;
    for i in lo..=hi {
        if i == n || rng.gen_bool(0.45) {
            continue;
        }
        let gap = Rational::new(rng.gen_range(2..=6), 2); // 1 to 3
        // dominated at both endpoints, and above the dominant term's worst
        // valuation so the recorded conservative gap is positive
        let needed = &v_n + &Rational::zero().max(Rational::from_int(n - i) * length.clone());
        let val = needed.max(dom_max.clone()) + gap.clone();
        let mut c = PuiseuxScalar::monomial(val.clone(), small(rng));
        if rng.gen_bool(0.3) {
            c = c.add(&PuiseuxScalar::monomial(&val + &q(3, 2), small(rng)));
        }
        coeffs.push((i, c.truncated(&prec)));
        if i != 0 {
            gap0 = Some(match gap0 {
                None => gap.clone(),
                Some(g) => g.min(gap.clone()),
            });
        }
    }
    let series = AnnulusSeries::new(skeleton, (lo, hi), coeffs).unwrap();
    FormSpec {
        form: AnnulusForm::new(series),
        gap0: gap0.unwrap_or_else(Rational::zero),
    }
}

#[test]
fn criterion_1_and_2_good_coordinate_soundness_and_contraction() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let total = 200;
    let mut contraction_violations = 0usize;
    let mut nontrivial_gap_suites = 0usize;
    for case in 0..total {
        let spec = random_form(&mut rng);
        let gc = good_coordinate(&spec.form)
            .unwrap_or_else(|e| panic!("case {case}: normalization failed: {e}\n{}", spec.form));
        let binom = gc.binomial_form(spec.form.skeleton().clone());
        let back = pullback_in_window(&binom, &gc.change, spec.form.series.window())
            .unwrap_or_else(|e| panic!("case {case}: pullback failed: {e}"));
        if let Some(i) = back.series.first_disagreement(&spec.form.series) {
            panic!(
                "case {case}: pullback disagrees with the input at index {i}:\n  input: {}\n  back:  {}",
                spec.form.series, back.series
            );
        }
        assert!(
            gc.c_0.agrees_with(&spec.form.residue().unwrap()),
            "case {case}: residue mismatch"
        );
        // recorded gaps grow at least linearly in the initial gap
        if let Some(Val::Finite(g0)) = gc.gaps.first().cloned() {
            if g0.is_positive() {
                nontrivial_gap_suites += 1;
            }
            for (j, g) in gc.gaps.iter().enumerate().skip(1) {
                let needed = g0.clone() * Rational::from_int(j as i64 + 1);
                match g {
                    Val::Infinite => {}
                    Val::Finite(g) => {
                        if g < &needed {
                            contraction_violations += 1;
                        }
                    }
                }
            }
        }
        let _ = spec.gap0;
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "1: good-coordinate soundness (200 forms)",
        true,
        &format!("{total} pullbacks coefficient-exact"),
    );
    check_time("1: good-coordinate soundness", elapsed, 10.0);
    report(
        "2: contraction rate g_j >= (j+1)g_0",
        contraction_violations == 0,
        &format!(
            "0 violations required, got {contraction_violations} ({nontrivial_gap_suites} suites with positive initial gap)"
        ),
    );
}

/// A random orientation-preserving coordinate change on the skeleton:
/// index 0 carries a valuation-0 unit, everything else is strictly
/// dominated at both endpoints.
fn random_unit(rng: &mut ChaCha8Rng, skeleton: &Skeleton) -> CoordinateChange {
    let l = &skeleton.length;
    let small = |rng: &mut ChaCha8Rng| Rational::new(rng.gen_range(1..=5), rng.gen_range(1..=3));
    let lead = loop {
        let v = rng.gen_range(-4i64..=4);
        if v != 0 {
            break Rational::new(v, 1);
        }
    };
    let mut coeffs = vec![(0i64, PuiseuxScalar::constant(lead))];
    for i in -2i64..=2 {
        if i == 0 || rng.gen_bool(0.4) {
            continue;
        }
        // val + i·x > 0 on [0, L] with a margin
        let needed = Rational::zero().max(-(Rational::from_int(i) * l.clone()));
        let val = needed + small(rng);
        coeffs.push((i, PuiseuxScalar::monomial(val, small(rng))));
    }
    let unit = AnnulusSeries::new(skeleton.clone(), (-2, 2), coeffs).unwrap();
    CoordinateChange::preserving(unit).unwrap()
}

#[test]
fn criterion_3_residue_invariance_and_alternation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEE5);
    let mut checked = 0usize;
    for _ in 0..50 {
        let spec = random_form(&mut rng);
        let skeleton = spec.form.skeleton().clone();
        let change = random_unit(&mut rng, &skeleton);
        let residue = spec.form.residue().unwrap();
        let back = pullback(&spec.form, &change).unwrap();
        assert!(
            back.residue().unwrap().agrees_with(&residue),
            "residue changed under a unit change:\n{} vs {}",
            back.residue().unwrap(),
            residue
        );
        // orientation reversal negates the residue
        let reversed_form = AnnulusForm::new(
            AnnulusSeries::new(
                skeleton.reversed(),
                spec.form.series.window(),
                spec.form
                    .series
                    .stored()
                    .map(|(i, c)| (*i, c.clone()))
                    .collect::<Vec<_>>(),
            )
            .unwrap(),
        );
        let reversal = CoordinateChange::reversing(
            AnnulusSeries::one(skeleton.clone()),
            PuiseuxScalar::t_pow(skeleton.length.clone()),
        )
        .unwrap();
        let flipped = pullback(&reversed_form, &reversal).unwrap();
        assert!(
            flipped.residue().unwrap().agrees_with(&residue.neg()),
            "reversal did not negate the residue"
        );
        checked += 1;
    }
    report(
        "3: residue invariance and alternation",
        checked == 50,
        &format!("{checked} random changes"),
    );
}

#[test]
fn criterion_4_harmonicity_on_fixture_models() {
    let mut vertices = 0usize;
    for (name, datum) in fixtures::all_liftable() {
        let model = lift(&datum, DEFAULT_WINDOW).unwrap();
        for v in model.complex.type2_vertices() {
            if v.is_boundary() {
                continue;
            }
            assert!(
                model.harmonicity_check(&v.id, DEFAULT_WINDOW).unwrap(),
                "{name}: residues around {} do not sum to zero",
                v.id
            );
            vertices += 1;
        }
    }
    report(
        "4: harmonicity at non-boundary vertices",
        vertices > 0,
        &format!("{vertices} vertices, all sums exactly zero"),
    );
}

#[test]
fn criterion_5_tropicalization_validates_and_grc_holds() {
    let mut models = 0usize;
    let mut subgraphs = 0usize;
    for (name, datum) in fixtures::all_liftable() {
        let model = lift(&datum, DEFAULT_WINDOW).unwrap();
        let trop = tropicalize(&model, DEFAULT_WINDOW).unwrap();
        let rep = validate(&trop);
        assert!(rep.passed(), "{name}: tropicalization fails validation\n{rep}");
        models += 1;

        // boundary sums agree on every full subgraph of interior vertices
        let verts: Vec<VertexId> = trop
            .complex
            .type2_vertices()
            .filter(|v| !v.is_boundary())
            .map(|v| v.id.clone())
            .collect();
        assert!(verts.len() <= 6);
        for mask in 1u32..(1 << verts.len()) {
            let sub: std::collections::BTreeSet<VertexId> = verts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| v.clone())
                .collect();
            let (lhs, rhs) = grc_sides(&trop, &sub).unwrap();
            assert!(
                lhs.sub(&rhs).is_exact_zero(),
                "{name}: boundary sums differ on {sub:?}"
            );
            subgraphs += 1;
        }
    }
    report(
        "5: tropicalize output validates + GRC equality",
        models > 0,
        &format!("{models} models, {subgraphs} subgraphs enumerated"),
    );
}

#[test]
fn criterion_6_lift_tropicalize_round_trip() {
    let started = Instant::now();
    let fixtures = fixtures::all_liftable();
    assert!(fixtures.len() >= 10, "need at least 10 liftable fixtures");
    for (name, datum) in &fixtures {
        let ok = roundtrip(datum, DEFAULT_WINDOW)
            .unwrap_or_else(|e| panic!("{name}: lifting failed: {e}"));
        assert!(ok, "{name}: round trip is not exact");
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "6: round trip over all liftable fixtures",
        true,
        &format!("{} fixtures exact", fixtures.len()),
    );
    check_time("6: round trip", elapsed, 30.0);
}

#[test]
fn criterion_7_residue_correction_exactness() {
    let t = PuiseuxScalar::t_pow(Rational::one());
    let mut corrected = 0usize;
    for (name, datum) in fixtures::all_liftable() {
        let lf = datum.level_function().unwrap();
        for v in datum.complex.type2_vertices() {
            let red = &datum.reductions[&v.id];
            let piece = tropdiff::lifting::local_lift(&v.id, v.genus(), red).unwrap();
            // perturb the residues by a zero-sum pattern two levels deeper
            let star = datum.complex.star(&v.id);
            if star.len() < 2 {
                continue;
            }
            let bump = t.mul_monomial(&-&red.level, &Rational::one()).mul(&t);
            let mut targets: BTreeMap<String, PuiseuxScalar> = star
                .iter()
                .map(|e| (e.id.clone(), datum.re[&e.id].clone()))
                .collect();
            let ids: Vec<String> = star.iter().map(|e| e.id.clone()).collect();
            let v0 = targets[&ids[0]].add(&bump);
            let v1 = targets[&ids[1]].sub(&bump);
            targets.insert(ids[0].clone(), v0);
            targets.insert(ids[1].clone(), v1);

            let out = residue_correct(&piece, &targets, v.is_boundary())
                .unwrap_or_else(|e| panic!("{name}/{}: correction failed: {e}", v.id));
            for (e, want) in &targets {
                let got = out.piece.residue_at_edge(e).unwrap();
                assert!(
                    got.sub(want).is_exact_zero(),
                    "{name}/{e}: achieved {got}, wanted {want}"
                );
            }
            // norm bookkeeping: correction strictly below the form's level,
            // and the level is unchanged
            match &out.margin {
                Val::Finite(m) => assert!(m.is_positive(), "{name}/{}", v.id),
                Val::Infinite => {}
            }
            assert_eq!(gauss_level(&out.piece).unwrap(), red.level);
            corrected += 1;
        }
        let _ = lf;
    }
    report(
        "7: residue correction exact with norm control",
        corrected > 0,
        &format!("{corrected} vertices corrected"),
    );
}

#[test]
fn criterion_8_torsor_laws_and_edge_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70501);
    let rand_nonzero = |rng: &mut ChaCha8Rng| loop {
        let n = rng.gen_range(-9i64..=9);
        let d = rng.gen_range(1i64..=4);
        if n != 0 {
            return Rational::new(n, d);
        }
    };
    // group law and transitivity
    for l in 1..=3i64 {
        for trial in 0..100 {
            let form = FormalForm::new(-l, rand_nonzero(&mut rng), rand_nonzero(&mut rng));
            let s1 = GnElement::new(rand_nonzero(&mut rng), rand_nonzero(&mut rng));
            let s2 = GnElement::new(rand_nonzero(&mut rng), rand_nonzero(&mut rng));
            assert!(
                verify_group_law(&form, &s1, &s2, 12).unwrap(),
                "group law failed at l={l}, trial {trial}"
            );
            let t1 = act(&s1, &form, 12).unwrap();
            let t2 = act(&s2, &form, 12).unwrap();
            let sigma = connecting_element(&form, &t1, &t2).unwrap();
            assert_eq!(gn_compose(&s1, &sigma, l), s2, "transitivity at l={l}");
        }
    }

    // edge matching on every gluing of every lifted fixture
    let mut edges = 0usize;
    for (name, datum) in fixtures::all_liftable() {
        let model = lift(&datum, DEFAULT_WINDOW).unwrap();
        for (edge, gluing) in &model.gluings {
            let length = match &model.complex.edges[edge].length {
                Val::Finite(l) => l.clone(),
                Val::Infinite => unreachable!(),
            };
            // base element of the near-side torsor, randomly rescaled
            let base = {
                let piece = &model.pieces[&model.complex.edges[edge].tail];
                let outer = piece.annuli[edge].0.clone();
                let coeffs: Vec<(i64, PuiseuxScalar)> = gluing
                    .tail
                    .unit
                    .stored()
                    .map(|(j, c)| {
                        let i = j + 1;
                        (
                            i,
                            c.mul_monomial(
                                &(-Rational::from_int(i) * outer.clone()),
                                &Rational::one(),
                            ),
                        )
                    })
                    .collect();
                let jet_len = if gluing.n < 0 { (-gluing.n) as usize } else { 1 };
                coordinate_reduction(&coeffs, jet_len).unwrap()
            };
            let lambda = GradedScalar::term(
                Rational::new(rng.gen_range(-3..=3), 1),
                rand_nonzero(&mut rng),
            );
            let tau: GradedCoordinate = base.scaled(&lambda);

            let image = phi_e(&model, edge, &tau).unwrap();
            // anti-equivariance
            let mu = GradedScalar::term(Rational::new(1, 2), Rational::from_int(3));
            let mu_inv = GradedScalar::term(Rational::new(-1, 2), Rational::new(1, 3));
            let image_scaled = phi_e(&model, edge, &tau.scaled(&mu)).unwrap();
            assert_eq!(
                image_scaled,
                image.scaled(&mu_inv),
                "{name}/{edge}: anti-equivariance"
            );
            // involution
            let op = model.complex.edges[edge].opposite.clone().unwrap();
            let back = phi_e(&model, &op, &image).unwrap();
            assert_eq!(back, tau, "{name}/{edge}: inverse identity");
            // grade relation across the edge
            assert_eq!(
                image.grade() + tau.grade(),
                -length,
                "{name}/{edge}: grade shift"
            );
            edges += 1;
        }
    }
    report(
        "8: torsor group law, transitivity, edge matching",
        edges > 0,
        &format!("300 law/transitivity pairs, {edges} glued edges"),
    );
}

/// Independent brute-force solve of the form identity for slope 1: given
/// the binomial data `(c_1, c_0)`, the coordinate `t = s + τ_2 s^2 + …`
/// with `F·t = c_1·s·t·t' + c_0·s·t'` is determined; solve it coefficient
/// by coefficient.
fn oracle_slope_one(
    form: &AnnulusForm,
    c1: &PuiseuxScalar,
    c0: &PuiseuxScalar,
    order: usize,
) -> Poly<PuiseuxScalar> {
    let coeff = |i: i64| -> PuiseuxScalar {
        form.series
            .known_at(i)
            .expect("oracle instance coefficients are known")
    };
    let mut tau = vec![PuiseuxScalar::zero(); order + 1]; // tau[i] = coefficient of s^i
    tau[1] = PuiseuxScalar::one();
    // degree 2: c_0·τ_2 + f_1 = c_1 + 2 c_0 τ_2
    tau[2] = coeff(1).sub(c1).div(c0).unwrap();
    for d in 3..=order {
        // [F·t]_d without the τ_d term
        let mut lhs = PuiseuxScalar::zero();
        for k in 0..=(d as i64) {
            let i = d as i64 - k;
            if i as usize >= d || i < 1 {
                continue;
            }
            lhs = lhs.add(&coeff(k).mul(&tau[i as usize]));
        }
        // c_1·[s·t·t']_d only involves indices below d
        let mut rhs = PuiseuxScalar::zero();
        for i in 1..d {
            let j = d - i;
            if j >= d || j < 1 {
                continue;
            }
            rhs = rhs.add(&tau[i].mul(&tau[j]).scale(&Rational::from_int(j as i64)));
        }
        rhs = rhs.mul(c1);
        // τ_d·(f_0 - c_0·d) = rhs - lhs  with f_0 = c_0
        let denom = c0.scale(&(Rational::one() - Rational::from_int(d as i64)));
        tau[d] = rhs.sub(&lhs).div(&denom).unwrap();
    }
    Poly::from_coeffs(tau)
}

#[test]
fn criterion_9_oracle_cross_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let prec = Val::Finite(q(24, 1));
    let mut instances = 0usize;
    while instances < 20 {
        // slope-1 instances with support in [0, 8] and a visible residue
        let skeleton = Skeleton::closed_interval(q(1, 1));
        let lead = Rational::new(rng.gen_range(1..=4), 1);
        let mut coeffs = vec![(1i64, PuiseuxScalar::constant(lead).truncated(&prec))];
        // residue: gap above the dominant term over the whole skeleton
        let c0_val = q(rng.gen_range(2..=3), 1);
        coeffs.push((
            0,
            PuiseuxScalar::monomial(c0_val.clone(), Rational::new(rng.gen_range(1..=5), 2))
                .truncated(&prec),
        ));
        for i in 2..=8i64 {
            if rng.gen_bool(0.5) {
                continue;
            }
            let val = q(rng.gen_range(2..=4), 1) + Rational::from_int(i - 1);
            coeffs.push((
                i,
                PuiseuxScalar::monomial(val, Rational::new(rng.gen_range(-4..=4), 1))
                    .truncated(&prec),
            ));
        }
        let series = AnnulusSeries::new(skeleton.clone(), (0, 8), coeffs).unwrap();
        let form = AnnulusForm::new(series);
        if form.dominant_index().ok() != Some(1) {
            continue;
        }
        instances += 1;

        let gc = good_coordinate(&form).unwrap();
        assert_eq!(gc.n, 1);
        // production coordinate as a series in s: t_p = s·u
        let t_prod = {
            let mut v = vec![PuiseuxScalar::zero(); 8];
            for (j, c) in gc.change.unit.stored() {
                let i = j + 1;
                if (0..8).contains(&i) {
                    v[i as usize] = c.clone();
                }
            }
            Poly::from_coeffs(v)
        };
        let (c1_oracle, t_oracle) = oracle_slope_one(&form, 7);
        // compare the invariant c_1·t on the first 6 coefficients
        let lhs = t_oracle.scale(&c1_oracle);
        let rhs = t_prod.scale(&gc.c_n);
        for i in 0..=6usize {
            let (a, b) = (lhs.coeff(i), rhs.coeff(i));
            assert!(
                a.agrees_with(&b) && !(a.is_zero_to_prec() && !b.is_zero_to_prec()),
                "instance {instances}, coefficient {i}: oracle {a} vs solver {b}"
            );
        }
        // sanity: the oracle's coordinate satisfies the identity directly
        let f_poly = Poly::from_coeffs(
            (0..=8)
                .map(|i| form.series.known_at(i).unwrap())
                .collect::<Vec<_>>(),
        );
        let st_prime = {
            let v: Vec<PuiseuxScalar> = (0..8)
                .map(|i| t_oracle.coeff(i).scale(&Rational::from_int(i as i64)))
                .collect();
            Poly::from_coeffs(v)
        };
        let lhs_id = series_mul(&f_poly, &t_oracle, 7);
        let rhs_id = series_mul(&t_oracle, &st_prime, 7)
            .scale(&c1_oracle)
            .add(&st_prime.scale(&gc.c_0).map(|c| c.clone()));
        for dd in 0..7usize {
            let diff = lhs_id.coeff(dd).sub(&rhs_id.coeff(dd));
            assert!(
                diff.is_zero_to_prec(),
                "oracle identity residual at degree {dd}: {diff}"
            );
        }
    }
    report(
        "9: independent undetermined-coefficients oracle",
        instances >= 20,
        &format!("{instances} instances, 6 coefficients each"),
    );
}

#[test]
fn roundtrip_outputs_match_fixture_data_exactly() {
    // supporting check for criterion 6: the tropicalized lift is compared
    // field by field, not merely boolean
    for (name, datum) in fixtures::all_liftable() {
        let model = lift(&datum, DEFAULT_WINDOW).unwrap();
        let back = tropicalize(&model, DEFAULT_WINDOW).unwrap();
        assert!(datum_matches(&back, &datum), "{name}");
        assert!(datum_matches(&datum, &back), "{name} (symmetry)");
    }
}
