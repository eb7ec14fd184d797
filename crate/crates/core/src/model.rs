//! Assembly description: part labels, geometry, relation matrices and the
//! JSON interchange format.
//!
//! An [`AssemblyModel`] is validated once on construction and is immutable
//! afterwards, so it can be shared read-only between planner threads.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One-based part identifier, as used in assembly files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartId(pub usize);

impl PartId {
    /// Zero-based index into per-part tables.
    #[inline]
    pub fn index(self) -> usize {
        self.0 - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        PartId(index + 1)
    }
}

impl fmt::Display for PartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartKind {
    Screw,
    Bolt,
    Nut,
    Regular,
    Base,
}

impl PartKind {
    #[inline]
    pub fn is_fastener(self) -> bool {
        matches!(self, PartKind::Screw | PartKind::Bolt | PartKind::Nut)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Grasp,
    Suction,
    ScrewRemoval,
}

impl TaskKind {
    /// The end effector that performs this kind of task.
    pub fn tool(self) -> Tool {
        match self {
            TaskKind::Grasp => Tool::ParallelGripper,
            TaskKind::Suction => Tool::SuctionGripper,
            TaskKind::ScrewRemoval => Tool::AirDriver,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tool {
    ParallelGripper,
    SuctionGripper,
    AirDriver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartLabel {
    pub kind: PartKind,
    pub task_kind: TaskKind,
    pub tool: Tool,
}

impl PartLabel {
    pub fn new(kind: PartKind, task_kind: TaskKind) -> Self {
        Self {
            kind,
            task_kind,
            tool: task_kind.tool(),
        }
    }
}

/// Axis-aligned extraction direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+X")]
    PosX,
    #[serde(rename = "-X")]
    NegX,
    #[serde(rename = "+Y")]
    PosY,
    #[serde(rename = "-Y")]
    NegY,
    #[serde(rename = "+Z")]
    PosZ,
    #[serde(rename = "-Z")]
    NegZ,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::PosX,
        Direction::NegX,
        Direction::PosY,
        Direction::NegY,
        Direction::PosZ,
        Direction::NegZ,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn unit(self) -> [f64; 3] {
        match self {
            Direction::PosX => [1.0, 0.0, 0.0],
            Direction::NegX => [-1.0, 0.0, 0.0],
            Direction::PosY => [0.0, 1.0, 0.0],
            Direction::NegY => [0.0, -1.0, 0.0],
            Direction::PosZ => [0.0, 0.0, 1.0],
            Direction::NegZ => [0.0, 0.0, -1.0],
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::PosX => "+X",
            Direction::NegX => "-X",
            Direction::PosY => "+Y",
            Direction::NegY => "-Y",
            Direction::PosZ => "+Z",
            Direction::NegZ => "-Z",
        };
        f.write_str(s)
    }
}

/// Robot arm identifier, serialized as `1` or `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Arm {
    One,
    Two,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::One, Arm::Two];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Arm::One => 0,
            Arm::Two => 1,
        }
    }

    #[inline]
    pub fn other(self) -> Arm {
        match self {
            Arm::One => Arm::Two,
            Arm::Two => Arm::One,
        }
    }
}

impl From<Arm> for u8 {
    fn from(arm: Arm) -> u8 {
        arm.index() as u8 + 1
    }
}

impl TryFrom<u8> for Arm {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Arm::One),
            2 => Ok(Arm::Two),
            other => Err(format!("arm id must be 1 or 2, got {other}")),
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Arm{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartGeometry {
    /// Millimeters.
    pub center_of_mass: [f64; 3],
    pub removal_directions: Vec<Direction>,
    /// Feasible rotary-stage angles in degrees, indexed by [`Arm::index`].
    pub orientations: [Vec<f64>; 2],
    /// Unit vector pointing out of the fastener head.
    pub fastener_axis: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub id: PartId,
    pub label: PartLabel,
    pub geometry: PartGeometry,
}

impl Part {
    #[inline]
    pub fn is_fastener(&self) -> bool {
        self.label.kind.is_fastener()
    }

    #[inline]
    pub fn is_base(&self) -> bool {
        self.label.kind == PartKind::Base
    }
}

/// Square boolean matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    n: usize,
    cells: Vec<bool>,
}

impl BoolMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cells: vec![false; n * n],
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.cells[u * self.n + v]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.cells[u * self.n + v] = value;
    }

    /// All `(u, v)` index pairs with a true entry, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| (0..self.n).filter(move |&v| self.get(u, v)).map(move |v| (u, v)))
    }
}

/// Relation data between parts. Entry `(u, v)` of `constraint` means `u`
/// must be removed before `v`; interference `(u, v, d)` means extracting
/// `u` along `d` collides with `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationMatrices {
    pub contact: BoolMatrix,
    pub connection: BoolMatrix,
    pub constraint: BoolMatrix,
    interference: Vec<bool>,
    blockers: Vec<[Vec<PartId>; 6]>,
}

impl RelationMatrices {
    pub fn new(n: usize) -> Self {
        Self {
            contact: BoolMatrix::new(n),
            connection: BoolMatrix::new(n),
            constraint: BoolMatrix::new(n),
            interference: vec![false; n * n * 6],
            blockers: vec![Default::default(); n],
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.contact.size()
    }

    #[inline]
    pub fn interferes(&self, u: PartId, v: PartId, dir: Direction) -> bool {
        let n = self.size();
        self.interference[(u.index() * n + v.index()) * 6 + dir.index()]
    }

    pub fn set_interference(&mut self, u: PartId, v: PartId, dir: Direction, value: bool) {
        let n = self.size();
        let slot = &mut self.interference[(u.index() * n + v.index()) * 6 + dir.index()];
        if *slot == value {
            return;
        }
        *slot = value;
        let list = &mut self.blockers[u.index()][dir.index()];
        if value {
            let pos = list.binary_search(&v).unwrap_or_else(|p| p);
            list.insert(pos, v);
        } else if let Ok(pos) = list.binary_search(&v) {
            list.remove(pos);
        }
    }

    /// Parts that collide with `u` when it is extracted along `dir`, sorted.
    #[inline]
    pub fn blockers(&self, u: PartId, dir: Direction) -> &[PartId] {
        &self.blockers[u.index()][dir.index()]
    }

    pub fn interference_triplets(&self) -> Vec<(PartId, PartId, Direction)> {
        let mut out = Vec::new();
        for (u, per_dir) in self.blockers.iter().enumerate() {
            for (d, list) in per_dir.iter().enumerate() {
                for &v in list {
                    out.push((PartId::from_index(u), v, Direction::ALL[d]));
                }
            }
        }
        out.sort();
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("eta is {declared} but {found} parts are listed")]
    EtaMismatch { declared: usize, found: usize },
    #[error("part ids must be exactly 1..={eta}; {detail}")]
    IdGap { eta: usize, detail: String },
    #[error("expected exactly one base part, found {0}")]
    BaseCount(usize),
    #[error("no removable parts: the model contains only a base")]
    NoRemovableParts,
    #[error("{part}: kind {kind:?} is inconsistent with task kind {task_kind:?}")]
    LabelMismatch {
        part: PartId,
        kind: PartKind,
        task_kind: TaskKind,
    },
    #[error("{0}: fastener without a fastener axis")]
    MissingFastenerAxis(PartId),
    #[error("{0}: fastener axis must be a nonzero finite vector")]
    BadFastenerAxis(PartId),
    #[error("{0}: no removal directions")]
    NoRemovalDirections(PartId),
    #[error("{part}: empty orientation list for {arm}")]
    NoOrientations { part: PartId, arm: Arm },
    #[error("{0}: non-finite geometry value")]
    NonFinite(PartId),
    #[error("{matrix} matrix: {detail}")]
    MatrixShape { matrix: &'static str, detail: String },
    #[error("{matrix} matrix references unknown part {id}")]
    UnknownPart { matrix: &'static str, id: usize },
    #[error("{matrix} relation between {u} and {v} is not symmetric")]
    Asymmetric {
        matrix: &'static str,
        u: PartId,
        v: PartId,
    },
    #[error("{matrix} relation on the diagonal at {part}")]
    SelfRelation { matrix: &'static str, part: PartId },
    #[error("connection {u}-{v} must join a fastener to a non-fastener")]
    BadConnection { u: PartId, v: PartId },
    #[error("cyclic constraints among {0:?}")]
    CyclicConstraints(Vec<PartId>),
    #[error("recovery target {0} is not a removable part")]
    BadTarget(usize),
    #[error("all centers of mass coincide; travel normalization is undefined")]
    DegenerateGeometry,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed assembly file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid assembly: {0}")]
    Validation(#[from] ValidationError),
    #[error("{part}: no handling orientation for {arm}")]
    NoOrientation { part: PartId, arm: Arm },
    #[error("unknown part {0}")]
    UnknownPart(PartId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyModel {
    eta: usize,
    parts: Vec<Part>,
    relations: RelationMatrices,
    recovery_targets: Vec<PartId>,
    base: PartId,
    max_com_distance: f64,
}

impl AssemblyModel {
    /// Validates and assembles a model. `parts` may be given in any order.
    pub fn new(
        mut parts: Vec<Part>,
        relations: RelationMatrices,
        recovery_targets: Vec<PartId>,
    ) -> Result<Self, ValidationError> {
        parts.sort_by_key(|p| p.id);
        let eta = parts.len();
        validate_ids(&parts)?;
        if relations.size() != eta {
            return Err(ValidationError::MatrixShape {
                matrix: "relation",
                detail: format!("size {} does not match {} parts", relations.size(), eta),
            });
        }

        let bases: Vec<PartId> = parts.iter().filter(|p| p.is_base()).map(|p| p.id).collect();
        if bases.len() != 1 {
            return Err(ValidationError::BaseCount(bases.len()));
        }
        if eta < 2 {
            return Err(ValidationError::NoRemovableParts);
        }
        for part in &mut parts {
            validate_part(part)?;
        }
        validate_relations(&parts, &relations)?;

        let mut targets = Vec::with_capacity(recovery_targets.len());
        for t in recovery_targets {
            if t.0 == 0 || t.0 > eta || t == bases[0] {
                return Err(ValidationError::BadTarget(t.0));
            }
            if !targets.contains(&t) {
                targets.push(t);
            }
        }

        let mut max_com_distance: f64 = 0.0;
        for a in 0..eta {
            for b in a + 1..eta {
                max_com_distance = max_com_distance
                    .max(distance(&parts[a].geometry.center_of_mass, &parts[b].geometry.center_of_mass));
            }
        }
        if max_com_distance <= 0.0 {
            return Err(ValidationError::DegenerateGeometry);
        }

        let model = Self {
            eta,
            parts,
            relations,
            recovery_targets: targets,
            base: bases[0],
            max_com_distance,
        };
        model.constraint_topological_order()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: AssemblyFile = serde_json::from_str(text)?;
        Ok(file.into_model()?)
    }

    /// Canonical JSON: sparse pair lists sorted ascending, pretty-printed.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&AssemblyFile::from_model(self))
            .expect("assembly file serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    #[inline]
    pub fn eta(&self) -> usize {
        self.eta
    }

    #[inline]
    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    #[inline]
    pub fn part(&self, id: PartId) -> &Part {
        &self.parts[id.index()]
    }

    #[inline]
    pub fn relations(&self) -> &RelationMatrices {
        &self.relations
    }

    #[inline]
    pub fn recovery_targets(&self) -> &[PartId] {
        &self.recovery_targets
    }

    #[inline]
    pub fn base(&self) -> PartId {
        self.base
    }

    /// Largest distance between any two centers of mass, in millimeters.
    #[inline]
    pub fn max_com_distance(&self) -> f64 {
        self.max_com_distance
    }

    #[inline]
    pub fn is_fastener(&self, id: PartId) -> bool {
        self.part(id).is_fastener()
    }

    pub fn ids(&self) -> impl Iterator<Item = PartId> + '_ {
        (1..=self.eta).map(PartId)
    }

    /// Every part except the base, ascending.
    pub fn removable_parts(&self) -> Vec<PartId> {
        self.ids().filter(|&id| id != self.base).collect()
    }

    pub fn fastener_count(&self) -> usize {
        self.parts.iter().filter(|p| p.is_fastener()).count()
    }

    #[inline]
    pub fn com_distance(&self, a: PartId, b: PartId) -> f64 {
        distance(
            &self.part(a).geometry.center_of_mass,
            &self.part(b).geometry.center_of_mass,
        )
    }

    #[inline]
    pub fn in_contact(&self, a: PartId, b: PartId) -> bool {
        self.relations.contact.get(a.index(), b.index())
    }

    #[inline]
    pub fn connected(&self, a: PartId, b: PartId) -> bool {
        self.relations.connection.get(a.index(), b.index())
    }

    /// True when `before` must be removed before `after`.
    #[inline]
    pub fn constrains(&self, before: PartId, after: PartId) -> bool {
        self.relations.constraint.get(before.index(), after.index())
    }

    pub fn has_constraints(&self) -> bool {
        self.relations.constraint.pairs().next().is_some()
    }

    /// Orientation in `part`'s list for `arm` with the smallest circular
    /// distance to `current_angle`; ties go to the smaller angle value.
    pub fn smallest_rotation(&self, part: PartId, arm: Arm, current_angle: f64) -> Result<f64, ModelError> {
        if part.0 == 0 || part.0 > self.eta {
            return Err(ModelError::UnknownPart(part));
        }
        nearest_angle(&self.part(part).geometry.orientations[arm.index()], current_angle)
            .ok_or(ModelError::NoOrientation { part, arm })
    }

    /// Kahn's algorithm over the constraint digraph; ties resolved by id.
    pub fn constraint_topological_order(&self) -> Result<Vec<PartId>, ValidationError> {
        let n = self.eta;
        let c = &self.relations.constraint;
        let mut indegree = vec![0usize; n];
        for (_, v) in c.pairs() {
            indegree[v] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_first() {
            order.push(PartId::from_index(u));
            for v in 0..n {
                if c.get(u, v) {
                    indegree[v] -= 1;
                    if indegree[v] == 0 {
                        ready.insert(v);
                    }
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).filter(|&v| indegree[v] > 0).map(PartId::from_index).collect();
            return Err(ValidationError::CyclicConstraints(stuck));
        }
        Ok(order)
    }
}

/// Circular distance between two angles in degrees, in `[0, 180]`.
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Maps any angle into `[0, 360)`.
#[inline]
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Member of `options` closest to `current` on the circle, smaller value on ties.
pub fn nearest_angle(options: &[f64], current: f64) -> Option<f64> {
    options.iter().copied().min_by(|&a, &b| {
        circular_distance(a, current)
            .total_cmp(&circular_distance(b, current))
            .then(a.total_cmp(&b))
    })
}

#[inline]
pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn validate_ids(parts: &[Part]) -> Result<(), ValidationError> {
    let eta = parts.len();
    for (i, part) in parts.iter().enumerate() {
        if part.id.0 != i + 1 {
            let detail = if part.id.0 == 0 {
                "id 0 is not allowed".to_string()
            } else if i > 0 && parts[i - 1].id == part.id {
                format!("duplicate id {}", part.id.0)
            } else {
                format!("missing id {}", i + 1)
            };
            return Err(ValidationError::IdGap { eta, detail });
        }
    }
    Ok(())
}

fn validate_part(part: &mut Part) -> Result<(), ValidationError> {
    let id = part.id;
    let label = part.label;
    let expects_driver = label.kind.is_fastener();
    if expects_driver != (label.task_kind == TaskKind::ScrewRemoval) {
        return Err(ValidationError::LabelMismatch {
            part: id,
            kind: label.kind,
            task_kind: label.task_kind,
        });
    }
    part.label.tool = label.task_kind.tool();

    let geom = &mut part.geometry;
    if geom.center_of_mass.iter().any(|c| !c.is_finite()) {
        return Err(ValidationError::NonFinite(id));
    }
    for list in geom.orientations.iter_mut() {
        if list.iter().any(|a| !a.is_finite()) {
            return Err(ValidationError::NonFinite(id));
        }
        for a in list.iter_mut() {
            *a = normalize_angle(*a);
        }
    }
    if label.kind == PartKind::Base {
        return Ok(());
    }
    if geom.removal_directions.is_empty() {
        return Err(ValidationError::NoRemovalDirections(id));
    }
    geom.removal_directions.dedup();
    for arm in Arm::BOTH {
        if geom.orientations[arm.index()].is_empty() {
            return Err(ValidationError::NoOrientations { part: id, arm });
        }
    }
    if label.kind.is_fastener() {
        let axis = geom.fastener_axis.ok_or(ValidationError::MissingFastenerAxis(id))?;
        let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(ValidationError::BadFastenerAxis(id));
        }
        geom.fastener_axis = Some([axis[0] / norm, axis[1] / norm, axis[2] / norm]);
    }
    Ok(())
}

fn validate_relations(parts: &[Part], rel: &RelationMatrices) -> Result<(), ValidationError> {
    let n = parts.len();
    for (name, m, symmetric) in [
        ("contact", &rel.contact, true),
        ("connection", &rel.connection, true),
        ("constraint", &rel.constraint, false),
    ] {
        for u in 0..n {
            if m.get(u, u) {
                return Err(ValidationError::SelfRelation {
                    matrix: name,
                    part: PartId::from_index(u),
                });
            }
            if symmetric {
                for v in u + 1..n {
                    if m.get(u, v) != m.get(v, u) {
                        return Err(ValidationError::Asymmetric {
                            matrix: name,
                            u: PartId::from_index(u),
                            v: PartId::from_index(v),
                        });
                    }
                }
            }
        }
    }
    for (u, v) in rel.connection.pairs() {
        if u < v && parts[u].is_fastener() == parts[v].is_fastener() {
            return Err(ValidationError::BadConnection {
                u: PartId::from_index(u),
                v: PartId::from_index(v),
            });
        }
    }
    for (u, v, _) in rel.interference_triplets() {
        if u == v {
            return Err(ValidationError::SelfRelation {
                matrix: "interference",
                part: u,
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Wire format

#[derive(Debug, Serialize, Deserialize)]
struct AssemblyFile {
    eta: usize,
    parts: Vec<PartRecord>,
    #[serde(default)]
    contact: MatrixRepr,
    #[serde(default)]
    connection: MatrixRepr,
    #[serde(default)]
    constraint: MatrixRepr,
    #[serde(default)]
    interference: Vec<(usize, usize, DirectionRepr)>,
    #[serde(default)]
    recovery_targets: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PartRecord {
    id: usize,
    kind: PartKind,
    task_kind: TaskKind,
    com_mm: [f64; 3],
    #[serde(default)]
    removal_dirs: Vec<Direction>,
    #[serde(default)]
    orientations: OrientationRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fastener_axis: Option<[f64; 3]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct OrientationRecord {
    #[serde(default)]
    arm1: Vec<f64>,
    #[serde(default)]
    arm2: Vec<f64>,
}

/// Either a dense `eta x eta` matrix (booleans or 0/1) or a list of
/// one-based `[u, v]` pairs.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Flags(Vec<Vec<bool>>),
    Numbers(Vec<Vec<u64>>),
}

impl Default for MatrixRepr {
    fn default() -> Self {
        MatrixRepr::Numbers(Vec::new())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DirectionRepr {
    Named(Direction),
    Index(usize),
}

impl MatrixRepr {
    fn fill(
        &self,
        name: &'static str,
        n: usize,
        symmetric: bool,
        out: &mut BoolMatrix,
    ) -> Result<(), ValidationError> {
        let shape_err = |detail: String| ValidationError::MatrixShape { matrix: name, detail };
        match self {
            MatrixRepr::Flags(rows) if rows.is_empty() => {}
            MatrixRepr::Flags(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(shape_err(format!("dense matrix must be {n}x{n}")));
                }
                for (u, row) in rows.iter().enumerate() {
                    for (v, &x) in row.iter().enumerate() {
                        out.set(u, v, x);
                    }
                }
            }
            MatrixRepr::Numbers(rows) => {
                let dense = rows.len() == n
                    && rows.iter().all(|r| r.len() == n && r.iter().all(|&x| x <= 1))
                    && rows.iter().flatten().any(|&x| x == 0);
                if dense {
                    for (u, row) in rows.iter().enumerate() {
                        for (v, &x) in row.iter().enumerate() {
                            out.set(u, v, x == 1);
                        }
                    }
                    return Ok(());
                }
                for pair in rows {
                    if pair.len() != 2 {
                        return Err(shape_err(format!("expected [u, v] pairs, got {pair:?}")));
                    }
                    let (u, v) = (pair[0] as usize, pair[1] as usize);
                    for id in [u, v] {
                        if id == 0 || id > n {
                            return Err(ValidationError::UnknownPart { matrix: name, id });
                        }
                    }
                    out.set(u - 1, v - 1, true);
                    if symmetric {
                        out.set(v - 1, u - 1, true);
                    }
                }
            }
        }
        Ok(())
    }

    fn sparse(m: &BoolMatrix, symmetric: bool) -> Self {
        MatrixRepr::Numbers(
            m.pairs()
                .filter(|&(u, v)| !symmetric || u < v)
                .map(|(u, v)| vec![u as u64 + 1, v as u64 + 1])
                .collect(),
        )
    }
}

impl AssemblyFile {
    fn into_model(self) -> Result<AssemblyModel, ValidationError> {
        let n = self.parts.len();
        if self.eta != n {
            return Err(ValidationError::EtaMismatch {
                declared: self.eta,
                found: n,
            });
        }
        let mut rel = RelationMatrices::new(n);
        self.contact.fill("contact", n, true, &mut rel.contact)?;
        self.connection.fill("connection", n, true, &mut rel.connection)?;
        self.constraint.fill("constraint", n, false, &mut rel.constraint)?;
        for (u, v, dir) in &self.interference {
            for &id in [u, v] {
                if id == 0 || id > n {
                    return Err(ValidationError::UnknownPart {
                        matrix: "interference",
                        id,
                    });
                }
            }
            let dir = match dir {
                DirectionRepr::Named(d) => *d,
                DirectionRepr::Index(i) => Direction::from_index(*i).ok_or_else(|| ValidationError::MatrixShape {
                    matrix: "interference",
                    detail: format!("direction index {i} out of range 0..6"),
                })?,
            };
            rel.set_interference(PartId(*u), PartId(*v), dir, true);
        }

        let parts = self
            .parts
            .into_iter()
            .map(|r| Part {
                id: PartId(r.id),
                label: PartLabel::new(r.kind, r.task_kind),
                geometry: PartGeometry {
                    center_of_mass: r.com_mm,
                    removal_directions: r.removal_dirs,
                    orientations: [r.orientations.arm1, r.orientations.arm2],
                    fastener_axis: r.fastener_axis,
                },
            })
            .collect();
        let targets = self.recovery_targets.into_iter().map(PartId).collect();
        AssemblyModel::new(parts, rel, targets)
    }

    fn from_model(model: &AssemblyModel) -> Self {
        let rel = &model.relations;
        Self {
            eta: model.eta,
            parts: model
                .parts
                .iter()
                .map(|p| PartRecord {
                    id: p.id.0,
                    kind: p.label.kind,
                    task_kind: p.label.task_kind,
                    com_mm: p.geometry.center_of_mass,
                    removal_dirs: p.geometry.removal_directions.clone(),
                    orientations: OrientationRecord {
                        arm1: p.geometry.orientations[0].clone(),
                        arm2: p.geometry.orientations[1].clone(),
                    },
                    fastener_axis: p.geometry.fastener_axis,
                })
                .collect(),
            contact: MatrixRepr::sparse(&rel.contact, true),
            connection: MatrixRepr::sparse(&rel.connection, true),
            constraint: MatrixRepr::sparse(&rel.constraint, false),
            interference: rel
                .interference_triplets()
                .into_iter()
                .map(|(u, v, d)| (u.0, v.0, DirectionRepr::Named(d)))
                .collect(),
            recovery_targets: model.recovery_targets.iter().map(|t| t.0).collect(),
        }
    }
}

/// Incremental construction of models in code (fixtures, generators, tests).
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    parts: Vec<Part>,
    contact: Vec<(usize, usize)>,
    connection: Vec<(usize, usize)>,
    constraint: Vec<(usize, usize)>,
    interference: Vec<(usize, usize, Direction)>,
    targets: Vec<PartId>,
}

impl Default for ModelBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self {
            parts: Vec::new(),
            contact: Vec::new(),
            connection: Vec::new(),
            constraint: Vec::new(),
            interference: Vec::new(),
            targets: Vec::new(),
        }
    }

    /// Adds a part and returns its id (ids are assigned 1, 2, ...).
    pub fn part(
        &mut self,
        kind: PartKind,
        task_kind: TaskKind,
        com: [f64; 3],
        removal_directions: &[Direction],
        orientations: [Vec<f64>; 2],
        fastener_axis: Option<[f64; 3]>,
    ) -> PartId {
        let id = PartId(self.parts.len() + 1);
        self.parts.push(Part {
            id,
            label: PartLabel::new(kind, task_kind),
            geometry: PartGeometry {
                center_of_mass: com,
                removal_directions: removal_directions.to_vec(),
                orientations,
                fastener_axis,
            },
        });
        id
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contact(&mut self, a: PartId, b: PartId) -> &mut Self {
        self.contact.push((a.0, b.0));
        self
    }

    pub fn connect(&mut self, a: PartId, b: PartId) -> &mut Self {
        self.connection.push((a.0, b.0));
        self
    }

    pub fn constrain(&mut self, before: PartId, after: PartId) -> &mut Self {
        self.constraint.push((before.0, after.0));
        self
    }

    pub fn interfere(&mut self, moving: PartId, obstacle: PartId, dir: Direction) -> &mut Self {
        self.interference.push((moving.0, obstacle.0, dir));
        self
    }

    pub fn target(&mut self, id: PartId) -> &mut Self {
        self.targets.push(id);
        self
    }

    pub fn build(&self) -> Result<AssemblyModel, ValidationError> {
        let n = self.parts.len();
        let mut rel = RelationMatrices::new(n);
        let check = |matrix: &'static str, id: usize| {
            if id == 0 || id > n {
                Err(ValidationError::UnknownPart { matrix, id })
            } else {
                Ok(())
            }
        };
        for &(a, b) in &self.contact {
            check("contact", a)?;
            check("contact", b)?;
            rel.contact.set(a - 1, b - 1, true);
            rel.contact.set(b - 1, a - 1, true);
        }
        for &(a, b) in &self.connection {
            check("connection", a)?;
            check("connection", b)?;
            rel.connection.set(a - 1, b - 1, true);
            rel.connection.set(b - 1, a - 1, true);
        }
        for &(a, b) in &self.constraint {
            check("constraint", a)?;
            check("constraint", b)?;
            rel.constraint.set(a - 1, b - 1, true);
        }
        for &(a, b, d) in &self.interference {
            check("interference", a)?;
            check("interference", b)?;
            rel.set_interference(PartId(a), PartId(b), d, true);
        }
        AssemblyModel::new(self.parts.clone(), rel, self.targets.clone())
    }
}
