use std::f64::consts::PI;

use scenium::geom::{vec3, Orientation};
use scenium::lang::parse;
use scenium::rng::SceneRng;
use scenium::sampler::{apply_mutation, Fault, RejectCause, SampleError, Sampler, SamplerConfig, Scene, Value};

fn sampler(src: &str) -> Sampler {
    Sampler::new(parse(src).unwrap(), SamplerConfig::default()).unwrap()
}

fn scene(src: &str, seed: u64) -> Scene {
    sampler(src).sample_scene(seed).unwrap_or_else(|e| panic!("{e}"))
}

fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn left_of_offsets_by_both_half_widths() {
    let s = scene(&corpus("objects.scn"), 1);
    let a = s.get("objectA").unwrap();
    let b = s.get("objectB").unwrap();
    // Independent oracle: explicit rotation matrix for yaw 45, roll 90.
    let (y, r) = (45f64.to_radians(), 90f64.to_radians());
    let rz = [[y.cos(), -y.sin(), 0.0], [y.sin(), y.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = [[r.cos(), 0.0, r.sin()], [0.0, 1.0, 0.0], [-r.sin(), 0.0, r.cos()]];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| rz[i][k] * ry[k][j]).sum();
        }
    }
    let off = [-2.0, 0.0, 0.0];
    let expected = vec3(
        1.0 + (0..3).map(|k| m[0][k] * off[k]).sum::<f64>(),
        2.0 + (0..3).map(|k| m[1][k] * off[k]).sum::<f64>(),
        3.0 + (0..3).map(|k| m[2][k] * off[k]).sum::<f64>(),
    );
    assert!(b.pose.position.distance(expected) < 1e-12, "{} vs {expected}", b.pose.position);
    assert!(b.pose.orientation.max_abs_diff(&a.pose.orientation) < 1e-12);
    let c = s.get("objectC").unwrap();
    assert!(c.pose.position.distance(b.pose.position + b.pose.orientation.apply(vec3(0.0, 0.0, 2.0))) < 1e-12);
}

#[test]
fn chair_rests_upright_on_floor() {
    for seed in 0..20 {
        let s = scene(&corpus("chair_on_floor.scn"), seed);
        let chair = s.ego().unwrap();
        assert!((chair.base_point().z - 0.05).abs() < 1e-9);
        assert!((chair.pose.position.z - 0.55).abs() < 1e-9);
        assert!(chair.pose.orientation.pitch().abs() < 1e-12 && chair.pose.orientation.roll().abs() < 1e-12);
        let p = chair.pose.position;
        assert!(p.x.abs() <= 2.5 && p.y.abs() <= 2.5);
    }
}

#[test]
fn planes_face_the_ball() {
    let s = scene(&corpus("facing.scn"), 3);
    let toward = &s.objects()[1];
    let directly = &s.objects()[2];
    assert_eq!(toward.pose.orientation.pitch(), 0.0);
    assert!((toward.pose.orientation.yaw() - PI / 2.0).abs() < 1e-12);
    assert!((directly.pose.orientation.yaw() + PI / 2.0).abs() < 1e-12);
    assert!((directly.pose.orientation.pitch() - 1.25f64.atan2(2.0)).abs() < 1e-12);
    assert!((directly.pose.orientation.pitch() - 0.5586).abs() < 1e-4);
}

#[test]
fn on_wins_parent_orientation_over_below() {
    let src = corpus("modifying_on.scn");
    let smp = sampler(&src);
    for seed in 0..30 {
        let s = smp.sample_scene(seed).unwrap();
        let cube = s.get("air_cube").unwrap();
        let green = s.ego().unwrap();
        let blue = &s.objects()[2];
        assert!((green.base_point().z - 0.05).abs() < 1e-6);
        assert!(green.pose.orientation.pitch().abs() < 1e-9 && green.pose.orientation.roll().abs() < 1e-9);
        assert!(blue.pose.orientation.max_abs_diff(&cube.pose.orientation) < 1e-9);
        assert_eq!(blue.color(), Some(vec3(0.0, 0.0, 200.0)));
        s.recheck().unwrap();
    }
}

#[test]
fn on_is_tangent_to_tilted_support() {
    let src = "ramp = new Object at (0, 0, 0), facing (0, 20 deg, 0), with width 6, with length 6, with height 0.2\n\
               box = new Object on ramp, with width 0.5, with length 0.5, with height 0.5\n";
    for seed in 0..10 {
        let s = scene(src, seed);
        let ramp = s.get("ramp").unwrap();
        let b = s.get("box").unwrap();
        assert!(ramp.mesh.distance_to_surface(b.base_point()) < 1e-6);
        let up = b.pose.orientation.up();
        assert!(up.distance(ramp.pose.orientation.up()) < 1e-9);
    }
}

#[test]
fn overlapping_boxes_exhaust_rejections() {
    let smp = Sampler::new(
        parse("a = new Object at (0, 0, 0)\nb = new Object at (0, 0, 0)\n").unwrap(),
        SamplerConfig {
            max_rejections: 20,
            ..SamplerConfig::default()
        },
    )
    .unwrap();
    match smp.sample_scene(0) {
        Err(SampleError::MaxRejectionsExceeded { cause, count, rejections }) => {
            assert_eq!(cause, RejectCause::Collision("a".into(), "b".into()));
            assert_eq!((count, rejections), (21, 21));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn always_false_requirement_never_accepts() {
    let smp = Sampler::new(
        parse("a = new Object at (Range(-1, 1), 0, 0)\nrequire a.position.x > 5\n").unwrap(),
        SamplerConfig {
            max_rejections: 50,
            ..SamplerConfig::default()
        },
    )
    .unwrap();
    assert!(matches!(smp.sample_scene(1), Err(SampleError::MaxRejectionsExceeded { .. })));
}

#[test]
fn half_of_samples_pass_positive_x() {
    let smp = sampler("objA = new Object at (Range(-1, 1), 0, 0)\nrequire objA.position.x > 0\n");
    let mut rng = SceneRng::seed_from_u64(11);
    let n = 1000;
    let mut accepted = 0;
    for _ in 0..n {
        match smp.attempt(&mut rng) {
            Ok(_) => accepted += 1,
            Err(Fault::Reject(RejectCause::Requirement { .. })) => {}
            Err(e) => panic!("{e}"),
        }
    }
    let rate = accepted as f64 / n as f64;
    assert!((rate - 0.5).abs() <= 0.05, "{rate}");
}

#[test]
fn conflicts_are_program_errors() {
    let smp = sampler("x = new Object at (1,2,3), at (4,5,6)\n");
    let err = smp.check().unwrap_err();
    assert!(err.message.contains("'position'"), "{}", err.message);
    assert!(matches!(smp.sample_scene(0), Err(SampleError::Program(_))));
}

#[test]
fn distributions_match_analytic_moments() {
    let draws = |src: &str, n: usize| -> Vec<Value> {
        let smp = sampler(&format!("v = {src}\n"));
        let mut rng = SceneRng::seed_from_u64(5);
        (0..n).map(|_| smp.attempt(&mut rng).unwrap().env["v"].clone()).collect()
    };
    assert!(draws("Range(5, 5)", 10).iter().all(|v| *v == Value::Number(5.0)));
    let xs: Vec<f64> = draws("Range(0, 30) deg", 10_000).iter().map(|v| v.as_number().unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean - 15f64.to_radians()).abs() < 0.5f64.to_radians(), "{}", mean.to_degrees());
    assert!(xs.iter().all(|x| (0.0..=30f64.to_radians()).contains(x)));
    let picks = draws("Uniform(1, 2, 3)", 10_000);
    for k in 1..=3 {
        let share = picks.iter().filter(|v| **v == Value::Number(k as f64)).count() as f64 / 1e4;
        assert!((share - 1.0 / 3.0).abs() < 0.02, "{k}: {share}");
    }
    let ns: Vec<f64> = draws("Normal(2, 0.5)", 10_000).iter().map(|v| v.as_number().unwrap()).collect();
    let m = ns.iter().sum::<f64>() / 1e4;
    let sd = (ns.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 1e4).sqrt();
    assert!((m - 2.0).abs() < 0.02 && (sd - 0.5).abs() < 0.015, "{m} {sd}");
}

#[test]
fn mutation_noise_has_documented_scale() {
    let base = scene("a = new Object at (1, 2, 3), facing (0.3, 0.1, 0)\n", 0);
    let mut rng = SceneRng::seed_from_u64(9);
    let mut zero = base.world.clone();
    apply_mutation(&mut zero, &[0], 0.0, &mut rng).unwrap();
    assert_eq!(zero.objects[0].pose, base.world.objects[0].pose);
    let n = 10_000;
    let mut dx = Vec::with_capacity(n);
    let mut dyaw = Vec::with_capacity(n);
    for _ in 0..n {
        let mut w = base.world.clone();
        apply_mutation(&mut w, &[0], 1.0, &mut rng).unwrap();
        let o = &w.objects[0];
        dx.push(o.pose.position.x - 1.0);
        dyaw.push(o.number("yaw").unwrap() - 0.3);
        assert_eq!(o.pose.position.z, 3.0);
        assert_eq!(o.number("pitch"), Some(0.1));
    }
    let sd = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    assert!((sd(&dx) / 0.5 - 1.0).abs() < 0.03, "{}", sd(&dx));
    assert!((sd(&dyaw) / 5f64.to_radians() - 1.0).abs() < 0.03);
}

#[test]
fn mutated_overlaps_are_rejected() {
    let smp = sampler("a = new Object at (0, 0, 0)\nb = new Object at (1.2, 0, 0)\nmutate b by 1\n");
    let s = smp.sample_scene(4).unwrap();
    let a = s.get("a").unwrap();
    let b = s.get("b").unwrap();
    assert!(!scenium::mesh::meshes_intersect(&a.mesh, &b.mesh, scenium::mesh::Heuristics::Off));
    assert_ne!(b.pose.position.x, 1.2);
}

#[test]
fn same_seed_same_scene_and_order_independence() {
    let a = scene("x = new Object at (Range(0,1), Range(0,1), 0), facing Range(0, 90) deg, with width Range(1, 2)\n", 42);
    let b = scene("x = new Object with width Range(1, 2), facing Range(0, 90) deg, at (Range(0,1), Range(0,1), 0)\n", 42);
    assert_eq!(a.objects()[0].pose, b.objects()[0].pose);
    assert_eq!(a.objects()[0].dims, b.objects()[0].dims);
    let c = scene("x = new Object at (Range(0,1), Range(0,1), 0), facing Range(0, 90) deg, with width Range(1, 2)\n", 42);
    assert_eq!(a.objects()[0].pose, c.objects()[0].pose);
}

#[test]
fn kinds_apply_defaults_and_self_references() {
    let s = scene(&corpus("kinds.scn"), 8);
    let toy = s.get("toy").unwrap();
    assert_eq!(toy.dims.x, toy.dims.y);
    assert!((0.1..=0.3).contains(&toy.dims.x));
    assert_eq!(toy.dims.z, 0.1);
    let robot = s.ego().unwrap();
    assert_eq!(robot.behavior().unwrap().name, "RandomWalk");
    s.recheck().unwrap();
}

#[test]
fn accepted_scenes_pass_exhaustive_recheck() {
    let src = "floor = new Object with width 4, with length 4, with height 0.1, with allowCollisions true\n\
               new Chair on floor, facing Range(0, 360) deg\n\
               new Table on floor, facing Range(0, 360) deg\n\
               new Chair on floor\n\
               new Ball on floor\n";
    let smp = sampler(src);
    for seed in 0..20 {
        let s = smp.sample_scene(seed).unwrap();
        s.recheck().unwrap();
        assert_eq!(s.objects().len(), 5);
    }
}

#[test]
fn visible_specifier_places_and_requires_visibility() {
    let src = "ego = new Object at (0, 0, 0), with viewAngles (90 deg, 60 deg), with visibleDistance 10\n\
               wall = new Object at (0, 3, 0), with width 20, with height 10, with length 0.2\n\
               t = new Ball visible\n";
    let smp = sampler(src);
    for seed in 0..5 {
        let s = smp.sample_scene(seed).unwrap();
        let t = s.get("t").unwrap().pose.position;
        assert!(t.y > 0.0 && t.y < 3.0 && t.norm() <= 10.0, "{t}");
    }
}

#[test]
fn identity_parent_by_default() {
    let s = scene("x = new Object\n", 0);
    assert_eq!(s.objects()[0].pose.orientation, Orientation::IDENTITY);
    assert_eq!(s.objects()[0].dims, vec3(1.0, 1.0, 1.0));
}
