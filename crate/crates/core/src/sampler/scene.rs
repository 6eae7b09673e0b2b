use std::sync::Arc;

use crate::geom::{vec3, Orientation, Pose, Vec3};
use crate::mesh::{IndexedMesh, Shape};
use crate::visibility::ViewSpec;

use super::error::{Fault, ProgramError, RejectCause};
use super::value::{BehaviorSpec, PropertyTable, Value};

/// One constructed object with its resolved properties and placed mesh.
#[derive(Debug, Clone)]
pub struct SceneObject {
    pub name: String,
    pub kind: String,
    pub properties: PropertyTable,
    pub pose: Pose,
    pub dims: Vec3,
    pub shape: Shape,
    pub mesh: Arc<IndexedMesh>,
}

fn number(props: &PropertyTable, name: &str) -> Result<f64, ProgramError> {
    match props.get(name) {
        Some(Value::Number(x)) => Ok(*x),
        Some(other) => Err(ProgramError::unanchored(format!(
            "property '{name}' must be a number, found {}",
            other.type_name()
        ))),
        None => Err(ProgramError::unanchored(format!("property '{name}' is missing"))),
    }
}

fn vector(props: &PropertyTable, name: &str) -> Result<Vec3, ProgramError> {
    match props.get(name) {
        Some(Value::Vector(v)) => Ok(*v),
        Some(other) => Err(ProgramError::unanchored(format!(
            "property '{name}' must be a vector, found {}",
            other.type_name()
        ))),
        None => Err(ProgramError::unanchored(format!("property '{name}' is missing"))),
    }
}

fn orientation(props: &PropertyTable, name: &str) -> Result<Orientation, ProgramError> {
    match props.get(name) {
        Some(Value::Orientation(o)) => Ok(*o),
        Some(Value::Vector(v)) => Ok(Orientation::from_euler(v.x, v.y, v.z)),
        Some(other) => Err(ProgramError::unanchored(format!(
            "property '{name}' must be an orientation, found {}",
            other.type_name()
        ))),
        None => Err(ProgramError::unanchored(format!("property '{name}' is missing"))),
    }
}

/// Global pose implied by a property table.
pub fn pose_from_properties(props: &PropertyTable) -> Result<Pose, ProgramError> {
    let parent = orientation(props, "parentOrientation")?;
    let local = Orientation::from_euler(number(props, "yaw")?, number(props, "pitch")?, number(props, "roll")?);
    Ok(Pose::new(vector(props, "position")?, parent.compose(&local)))
}

pub fn dims_from_properties(props: &PropertyTable) -> Result<Vec3, ProgramError> {
    Ok(vec3(number(props, "width")?, number(props, "length")?, number(props, "height")?))
}

impl SceneObject {
    pub fn new(name: String, kind: String, properties: PropertyTable, shape: Shape) -> Result<SceneObject, Fault> {
        let pose = pose_from_properties(&properties)?;
        let dims = dims_from_properties(&properties)?;
        if !(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0) || !dims.is_finite() {
            return Err(RejectCause::Geometry(format!("{name} has non-positive dimensions {dims}")).into());
        }
        if !pose.position.is_finite() {
            return Err(RejectCause::Geometry(format!("{name} has a non-finite position")).into());
        }
        let mesh = Arc::new(IndexedMesh::from_shape(&shape, &pose, dims));
        Ok(SceneObject {
            name,
            kind,
            properties,
            pose,
            dims,
            shape,
            mesh,
        })
    }

    /// Moves the object, keeping `position` and the placed mesh in sync.
    pub fn set_pose(&mut self, pose: Pose) {
        self.pose = pose;
        self.properties.insert("position".into(), Value::Vector(pose.position));
        self.mesh = Arc::new(IndexedMesh::from_shape(&self.shape, &pose, self.dims));
    }

    /// Recomputes the pose after position or angles were edited in place.
    pub fn refresh_pose(&mut self) -> Result<(), ProgramError> {
        let pose = pose_from_properties(&self.properties)?;
        self.set_pose(pose);
        Ok(())
    }

    pub fn property(&self, name: &str) -> Option<&Value> {
        self.properties.get(name)
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        self.properties.get(name).and_then(Value::as_number)
    }

    pub fn allows_collisions(&self) -> bool {
        matches!(self.properties.get("allowCollisions"), Some(Value::Bool(true)))
    }

    pub fn color(&self) -> Option<Vec3> {
        self.properties.get("color").and_then(Value::as_vector)
    }

    pub fn behavior(&self) -> Option<&BehaviorSpec> {
        match self.properties.get("behavior") {
            Some(Value::Behavior(b)) => Some(b),
            _ => None,
        }
    }

    pub fn view_spec(&self) -> ViewSpec {
        let mut spec = ViewSpec::default();
        if let Some(v) = self.properties.get("viewAngles").and_then(Value::as_vector) {
            spec.horizontal = v.x;
            spec.vertical = v.y;
        }
        if let Some(d) = self.number("visibleDistance") {
            spec.visible_distance = d;
        }
        if let Some(r) = self.number("rayDensity") {
            spec.ray_density = r;
        }
        spec
    }

    /// Global position of the base point.
    pub fn base_point(&self) -> Vec3 {
        let offset = self
            .properties
            .get("baseOffset")
            .and_then(Value::as_vector)
            .unwrap_or(vec3(0.0, 0.0, -self.dims.z / 2.0));
        let parent = orientation(&self.properties, "parentOrientation").unwrap_or_default();
        self.pose.position + parent.apply(offset)
    }
}

#[derive(Debug, Clone, Default)]
pub struct World {
    pub objects: Vec<SceneObject>,
    pub ego: Option<usize>,
}

impl World {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&SceneObject> {
        self.index_of(name).map(|i| &self.objects[i])
    }
}
