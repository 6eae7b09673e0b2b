//! Scene documents (JSON) and merged OBJ meshes.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::geom::Vec3;
use crate::mesh::{write_obj, ObjGroup};
use crate::sampler::{Scene, Value, World};

/// A float written with 17 significant digits, so it reads back bit-exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn vector(v: Vec3) -> [Float; 3] {
    [Float(v.x), Float(v.y), Float(v.z)]
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Json {
    Null,
    Bool(bool),
    Number(Float),
    Str(String),
    Array(Vec<Json>),
    Object(BTreeMap<String, Json>),
}

fn value_json(v: &Value, world: &World) -> Json {
    match v {
        Value::None => Json::Null,
        Value::Number(x) => Json::Number(Float(*x)),
        Value::Bool(b) => Json::Bool(*b),
        Value::Str(s) => Json::Str(s.clone()),
        Value::Vector(v) => Json::Array(vector(*v).into_iter().map(Json::Number).collect()),
        Value::Orientation(o) => {
            let (y, p, r) = o.euler_angles();
            Json::Array([y, p, r].into_iter().map(|x| Json::Number(Float(x))).collect())
        }
        Value::Object(i) => Json::Str(world.objects[*i].name.clone()),
        Value::Region(_) => Json::Str("region".into()),
        Value::Behavior(b) => {
            let mut m = BTreeMap::new();
            m.insert("name".into(), Json::Str(b.name.clone()));
            m.insert("args".into(), Json::Array(b.args.iter().map(|a| value_json(a, world)).collect()));
            Json::Object(m)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectDocument {
    pub name: String,
    pub kind: String,
    pub position: [Float; 3],
    pub yaw: Float,
    pub pitch: Float,
    pub roll: Float,
    pub dimensions: [Float; 3],
    pub shape: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<[Float; 3]>,
    pub properties: BTreeMap<String, Json>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SceneDocument {
    pub seed: u64,
    pub rejections: usize,
    pub objects: Vec<ObjectDocument>,
}

/// Properties already exported as dedicated fields.
const STRUCTURAL: &[&str] = &["position", "yaw", "pitch", "roll", "width", "length", "height", "shape", "color"];

impl SceneDocument {
    pub fn from_scene(scene: &Scene) -> SceneDocument {
        let world = &scene.world;
        let objects = world
            .objects
            .iter()
            .map(|o| {
                let (yaw, pitch, roll) = o.pose.orientation.euler_angles();
                let properties = o
                    .properties
                    .iter()
                    .filter(|(k, _)| !STRUCTURAL.contains(&k.as_str()))
                    .map(|(k, v)| (k.clone(), value_json(v, world)))
                    .collect();
                ObjectDocument {
                    name: o.name.clone(),
                    kind: o.kind.clone(),
                    position: vector(o.pose.position),
                    yaw: Float(yaw),
                    pitch: Float(pitch),
                    roll: Float(roll),
                    dimensions: vector(o.dims),
                    shape: o.shape.descriptor(),
                    color: o.color().map(vector),
                    properties,
                }
            })
            .collect();
        SceneDocument {
            seed: scene.seed,
            rejections: scene.rejections,
            objects,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene documents always serialize");
        s.push('\n');
        s
    }
}

/// All object meshes, posed in the global frame, one `o` group per object.
pub fn write_scene_obj<W: Write>(out: &mut W, scene: &Scene) -> io::Result<()> {
    let groups: Vec<ObjGroup<'_>> = scene
        .world
        .objects
        .iter()
        .map(|o| ObjGroup {
            name: &o.name,
            mesh: o.mesh.mesh(),
        })
        .collect();
    write_obj(out, &groups)
}
