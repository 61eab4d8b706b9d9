use orlicz::family::{sample, smooth_family, FamilyError, FunctionFamily, Generator, GridSpec};

const LINE: GridSpec = GridSpec { n: 1, points: 256, half_width: 8.0 };

#[test]
fn parses_generator_specs() {
    assert_eq!(Generator::parse("gaussian(0,1)").unwrap(), Generator::Gaussian { center: 0.0, width: 1.0 });
    assert_eq!(Generator::parse("bump(center=0.5, width=2)").unwrap(), Generator::Bump { center: 0.5, width: 2.0 });
    assert_eq!(Generator::parse("trigpoly(4, 9)").unwrap(), Generator::Trigpoly { degree: 4, seed: 9 });
    for g in ["gaussian(0,1)", "hat(-1,0.5)", "step(3,2)", "trigpoly(2,7)"] {
        assert_eq!(Generator::parse(g).unwrap().to_string(), g);
    }
    assert!(matches!(Generator::parse("wave(1)"), Err(FamilyError::Unknown(_))));
    assert!(Generator::parse("gaussian(0,-1)").is_err());
    assert!(Generator::parse("trigpoly(1.5,2)").is_err());
    assert!(Generator::parse("step(0,2)").is_err());
}

#[test]
fn gaussian_peaks_at_the_centre_cell() {
    let grid = GridSpec { n: 1, points: 1024, half_width: 8.0 };
    let u = sample(Generator::Gaussian { center: 0.0, width: 1.0 }, grid).unwrap();
    let (argmax, &peak) = u.values().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert_eq!(argmax, 512);
    assert_eq!(u.coord(argmax), 0.0);
    assert_eq!(peak, 1.0);
}

#[test]
fn members_are_reproducible_in_any_order() {
    let fam = FunctionFamily::new(Generator::Gaussian { center: 0.0, width: 0.75 }, 6, LINE, 42);
    let forward = fam.generate().unwrap();
    let again = FunctionFamily::new(Generator::Gaussian { center: 0.0, width: 0.75 }, 6, LINE, 42);
    for k in (0..6).rev() {
        assert_eq!(again.generate_member(k).unwrap().values(), forward[k].values());
    }
    assert_eq!(fam.member_generator(0), fam.generator);
    let other = FunctionFamily::new(fam.generator, 6, LINE, 43);
    assert_ne!(other.member_generator(3), fam.member_generator(3));
}

#[test]
fn smooth_family_alternates_gaussians_and_bumps() {
    let members = smooth_family(LINE, 5, 1).unwrap();
    assert_eq!(members.len(), 5);
    for (k, (name, _)) in members.iter().enumerate() {
        assert!(name.starts_with(if k % 2 == 0 { "gaussian" } else { "bump" }), "{name}");
    }
}

#[test]
fn trigpoly_is_band_limited() {
    let degree = 5;
    let u = sample(Generator::Trigpoly { degree, seed: 3 }, LINE).unwrap();
    let n = u.values().len();
    let scale: f64 = u.values().iter().map(|v| v.abs()).sum();
    for k in 0..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in u.values().iter().enumerate() {
            let phase = 2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64;
            re += v * phase.cos();
            im -= v * phase.sin();
        }
        // Mode k of the sampled box is frequency pi k / L.
        let amp = re.hypot(im) / scale;
        if k > degree {
            assert!(amp < 1e-12, "mode {k}: {amp}");
        }
    }
}

#[test]
fn rejects_members_that_reach_the_boundary() {
    let fam = FunctionFamily::new(Generator::Gaussian { center: 7.0, width: 1.0 }, 1, LINE, 1);
    match fam.generate_member(0) {
        Err(FamilyError::BoundaryMass { member: 0, fraction, .. }) => assert!(fraction < 0.9999),
        other => panic!("expected a boundary-mass error, got {other:?}"),
    }
    let inside = FunctionFamily::new(Generator::Gaussian { center: 0.0, width: 1.0 }, 1, LINE, 1);
    assert!(inside.generate_member(0).is_ok());
}
