use scenium::export::{write_scene_obj, SceneDocument};
use scenium::lang::parse;
use scenium::mesh::{load_mesh, read_mesh, Aabb, Shape};
use scenium::sampler::{Sampler, SamplerConfig, Scene};

fn scene(src: &str, seed: u64) -> Scene {
    Sampler::new(parse(src).unwrap(), SamplerConfig::default())
        .unwrap()
        .sample_scene(seed)
        .unwrap_or_else(|e| panic!("{e}"))
}

fn scenario(name: &str) -> String {
    std::fs::read_to_string(format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(format!("{}/schema/scene.schema.json", env!("CARGO_MANIFEST_DIR"))).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

#[test]
fn documents_validate_against_the_shipped_schema() {
    let v = validator();
    let sources = [
        scenario("vacuum.scn") + "new Toy on floor\n",
        scenario("intersection.scn"),
        "ego = new Ball at (0, 0, 1.25), with color (0.2, 0.4, 0.6)\nnew Plane at (2, 0, 0), facing toward ego".to_string(),
    ];
    for src in &sources {
        let json = SceneDocument::from_scene(&scene(src, 4)).to_json();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
    }
    let broken = serde_json::json!({"seed": 1, "rejections": 0, "objects": [{"name": "x"}]});
    assert!(!v.is_valid(&broken));
}

#[test]
fn numbers_round_trip_bit_exact() {
    let s = scene("ego = new Ball at (Range(-1, 1), 0.1, 1 / 3)", 9);
    let json = SceneDocument::from_scene(&s).to_json();
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let p = s.ego().unwrap().pose.position;
    let read: Vec<f64> = doc["objects"][0]["position"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(read, vec![p.x, p.y, p.z]);
    assert_eq!(doc["objects"][0]["name"], "ego");
    assert_eq!(doc["objects"][0]["shape"], "sphere");
}

#[test]
fn object_order_follows_construction() {
    let s = scene(&(scenario("vacuum.scn") + "new Toy on floor\nnew Toy on floor\n"), 2);
    let doc: serde_json::Value = serde_json::from_str(&SceneDocument::from_scene(&s).to_json()).unwrap();
    let names: Vec<&str> = doc["objects"].as_array().unwrap().iter().map(|o| o["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["floor", "wallN", "wallS", "wallE", "wallW", "table", "chair1", "chair2", "cabinet", "ego", "toy10", "toy11"]
    );
}

#[test]
fn obj_export_reloads_with_matching_bounds() {
    let s = scene(&scenario("vacuum.scn"), 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.obj");
    let mut f = std::fs::File::create(&path).unwrap();
    write_scene_obj(&mut f, &s).unwrap();
    drop(f);
    assert!(matches!(load_mesh(&path).unwrap(), Shape::Mesh { .. }));
    let merged = read_mesh(&path).unwrap();
    let expected = s
        .objects()
        .iter()
        .map(|o| o.mesh.aabb())
        .reduce(Aabb::union)
        .unwrap();
    let got = merged.aabb();
    assert!((got.min - expected.min).norm() < 1e-12 && (got.max - expected.max).norm() < 1e-12, "{got:?} {expected:?}");
}
