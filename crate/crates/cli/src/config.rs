//! Problem configuration: flat JSON with `mesh`, `materials`, `boundary`,
//! `sources`, and `solver` sections. All physical values are SI; region
//! and boundary tags are the integers carried by the mesh.

use mefem::algebra::Metric;
use mefem::constitutive::{CouplingMode, IsotropicElastic, MagnetoElasticEnergy};
use mefem::mesh::{generate_box_mesh_with, read_mesh, SimplicialMesh};
use mefem::solve::{DisplacementBc, PotentialBc, ProblemSpec, SourceDensity};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub mesh: MeshSection,
    pub materials: MaterialsSection,
    #[serde(default, skip_serializing_if = "BoundarySection::is_empty")]
    pub boundary: BoundarySection,
    #[serde(default, skip_serializing_if = "SourcesSection::is_empty")]
    pub sources: SourcesSection,
    #[serde(default)]
    pub solver: SolverSection,
    /// Which convergence study the `convergence` command runs on this
    /// configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisions: Option<[usize; 3]>,
    /// Optional axis-aligned slab region between two z planes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab: Option<SlabSection>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SlabSection {
    pub zmin: f64,
    pub zmax: f64,
    pub region: i32,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialsSection {
    #[serde(default = "default_coupling")]
    pub coupling: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic_metric_term: Option<bool>,
    /// Metric tensor: three diagonal entries or nine row-major entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<f64>>,
    #[serde(default)]
    pub regions: BTreeMap<String, RegionMaterial>,
}

fn default_coupling() -> String {
    "none".into()
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegionMaterial {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reluctivity: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub displacement: Vec<DisplacementEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traction: Vec<TractionEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vector_potential: Vec<PotentialEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surface_h: Vec<SurfaceHEntry>,
}

impl BoundarySection {
    fn is_empty(&self) -> bool {
        self.displacement.is_empty()
            && self.traction.is_empty()
            && self.vector_potential.is_empty()
            && self.surface_h.is_empty()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DisplacementEntry {
    pub tag: TagSet,
    /// All three components prescribed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 3]>,
    /// Per-component prescription; `null` leaves a component free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<[Option<f64>; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TractionEntry {
    pub tag: TagSet,
    pub force_per_area: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialEntry {
    pub tag: TagSet,
    /// Potential of a uniform induction, given as the flux-density vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_b: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceHEntry {
    pub tag: TagSet,
    /// Surface field intensity 1-form components.
    pub h: [f64; 3],
}

/// A boundary tag, a list of tags, or `"all"` for tags 1..=6.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum TagSet {
    One(i32),
    Many(Vec<i32>),
    All(String),
}

impl TagSet {
    pub fn tags(&self) -> Result<Vec<i32>, String> {
        match self {
            TagSet::One(t) => Ok(vec![*t]),
            TagSet::Many(v) => Ok(v.clone()),
            TagSet::All(s) if s == "all" => Ok((1..=6).collect()),
            TagSet::All(s) => Err(format!("unknown tag set '{s}' (expected an id or \"all\")")),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourcesSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub body_force: Vec<BodyForceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub current_density: Vec<CurrentEntry>,
}

impl SourcesSection {
    fn is_empty(&self) -> bool {
        self.body_force.is_empty() && self.current_density.is_empty()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BodyForceEntry {
    pub region: i32,
    pub force_per_volume: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CurrentEntry {
    pub region: i32,
    /// Current density vector (the corresponding 2-form is its contraction
    /// with the volume form).
    pub j: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub linear_tol: f64,
    pub max_linear_iter: usize,
    pub coupling_tol: f64,
    pub max_outer_iter: usize,
    pub damping: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = mefem::solve::SolverSettings::default();
        Self {
            linear_tol: d.linear_tol,
            max_linear_iter: d.max_linear_iter,
            coupling_tol: d.outer_tol,
            max_outer_iter: d.max_outer_iter,
            damping: d.damping,
        }
    }
}

/// A configuration problem: bad file, bad schema, or inconsistent data.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))
}

pub fn coupling_from_str(s: &str) -> Result<Option<CouplingMode>, ConfigError> {
    match s {
        "none" => Ok(None),
        "model_a" => Ok(Some(CouplingMode::ModelA)),
        "model_b" => Ok(Some(CouplingMode::ModelB)),
        "model_b_linearized" => Ok(Some(CouplingMode::ModelBLinearized)),
        other => Err(ConfigError(format!(
            "unknown coupling '{other}' (expected none|model_a|model_b|model_b_linearized)"
        ))),
    }
}

/// Builds the mesh described by the configuration (file or generated box).
pub fn build_mesh(cfg: &Config, mesh_override: Option<&Path>) -> Result<SimplicialMesh, ConfigError> {
    if let Some(path) = mesh_override {
        return read_mesh(path).map_err(|e| ConfigError(format!("{e}")));
    }
    if let Some(file) = &cfg.mesh.file {
        return read_mesh(file).map_err(|e| ConfigError(format!("{e}")));
    }
    let extent = cfg
        .mesh
        .extent
        .ok_or_else(|| ConfigError("mesh section needs 'file' or 'extent'+'divisions'".into()))?;
    let divisions = cfg
        .mesh
        .divisions
        .ok_or_else(|| ConfigError("mesh section needs 'divisions'".into()))?;
    build_box(cfg, extent, divisions)
}

pub fn build_box(
    cfg: &Config,
    extent: [f64; 3],
    divisions: [usize; 3],
) -> Result<SimplicialMesh, ConfigError> {
    let slab = cfg.mesh.slab;
    generate_box_mesh_with(
        extent,
        divisions,
        move |c| match slab {
            Some(s) if c[2] > s.zmin && c[2] < s.zmax => s.region,
            _ => 1,
        },
        None,
    )
    .map_err(|e| ConfigError(format!("{e}")))
}

fn metric_from(cfg: &MaterialsSection) -> Result<Metric, ConfigError> {
    match &cfg.metric {
        None => Ok(Metric::euclidean()),
        Some(v) if v.len() == 3 => {
            Metric::diagonal([v[0], v[1], v[2]]).map_err(|e| ConfigError(format!("{e}")))
        }
        Some(v) if v.len() == 9 => {
            let mut g = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] = v[3 * i + j];
                }
            }
            Metric::new(g).map_err(|e| ConfigError(format!("{e}")))
        }
        Some(v) => Err(ConfigError(format!(
            "metric needs 3 (diagonal) or 9 (full) entries, got {}",
            v.len()
        ))),
    }
}

/// Assembles the material model, resolving the coupling mode with an
/// optional command-line override.
pub fn build_material(
    cfg: &Config,
    coupling_override: Option<&str>,
) -> Result<(MagnetoElasticEnergy, Option<CouplingMode>), ConfigError> {
    let coupling_str = coupling_override.unwrap_or(&cfg.materials.coupling);
    let coupling = coupling_from_str(coupling_str)?;
    let metric = metric_from(&cfg.materials)?;
    // a decoupled run still needs a concrete mode for the material holder
    let mode = coupling.unwrap_or(CouplingMode::ModelA);
    let mut model = MagnetoElasticEnergy::new(mode, metric);
    if let Some(q) = cfg.materials.quadratic_metric_term {
        model.quadratic_metric_term = q;
    }
    for (tag_str, mat) in &cfg.materials.regions {
        let tag: i32 = tag_str
            .parse()
            .map_err(|_| ConfigError(format!("region tag '{tag_str}' is not an integer")))?;
        match (mat.lambda, mat.mu) {
            (Some(l), Some(m)) => {
                let el = IsotropicElastic::new(l, m).map_err(|e| {
                    ConfigError(format!("region {tag}: {e}"))
                })?;
                model = model.with_elastic(tag, el);
            }
            (None, None) => {}
            _ => {
                return Err(ConfigError(format!(
                    "region {tag} must give both lambda and mu or neither"
                )))
            }
        }
        if let Some(r) = mat.reluctivity {
            if r <= 0.0 {
                return Err(ConfigError(format!(
                    "region {tag}: reluctivity must be positive, got {r}"
                )));
            }
            model = model.with_reluctivity(tag, r);
        }
    }
    Ok((model, coupling))
}

/// Checks that every region present in the mesh carries a reluctivity when
/// a magnetic solve is requested.
pub fn require_reluctivity(
    mesh: &SimplicialMesh,
    model: &MagnetoElasticEnergy,
) -> Result<(), ConfigError> {
    for t in 0..mesh.tet_count() {
        let region = mesh.region(t);
        if !model.reluctivity.contains_key(&region) {
            return Err(ConfigError(format!(
                "missing reluctivity for region {region} in a magnetic solve"
            )));
        }
    }
    Ok(())
}

/// Whether the configuration drives a magnetic solve at all.
pub fn wants_magnetics(cfg: &Config) -> bool {
    !cfg.boundary.vector_potential.is_empty()
        || !cfg.boundary.surface_h.is_empty()
        || !cfg.sources.current_density.is_empty()
}

/// Whether the configuration drives an elastic solve.
pub fn wants_elasticity(cfg: &Config, model: &MagnetoElasticEnergy) -> bool {
    !model.elastic.is_empty()
        && (!cfg.boundary.displacement.is_empty()
            || !cfg.boundary.traction.is_empty()
            || !cfg.sources.body_force.is_empty())
}

/// Populates a problem specification from the configuration.
pub fn build_spec<'m>(
    cfg: &Config,
    mesh: &'m SimplicialMesh,
    model: MagnetoElasticEnergy,
    tol_override: Option<f64>,
) -> Result<ProblemSpec<'m>, ConfigError> {
    let mut spec = ProblemSpec::new(mesh, model);
    spec.settings.linear_tol = tol_override.unwrap_or(cfg.solver.linear_tol);
    spec.settings.max_linear_iter = cfg.solver.max_linear_iter;
    spec.settings.outer_tol = cfg.solver.coupling_tol;
    spec.settings.max_outer_iter = cfg.solver.max_outer_iter;
    spec.settings.damping = cfg.solver.damping;

    for entry in &cfg.boundary.displacement {
        let bc = match (entry.value, entry.components) {
            (Some(v), None) => DisplacementBc::Components([Some(v[0]), Some(v[1]), Some(v[2])]),
            (None, Some(c)) => DisplacementBc::Components(c),
            _ => {
                return Err(ConfigError(
                    "displacement entry needs exactly one of 'value' or 'components'".into(),
                ))
            }
        };
        for tag in entry.tag.tags().map_err(ConfigError)? {
            spec.displacement_bc.insert(tag, bc.clone());
        }
    }
    for entry in &cfg.boundary.traction {
        for tag in entry.tag.tags().map_err(ConfigError)? {
            spec.traction.insert(tag, entry.force_per_area);
        }
    }
    for entry in &cfg.boundary.vector_potential {
        let bc = match entry.uniform_b {
            // flux-density vector to 2-form components [b12, b13, b23]
            Some(b) => PotentialBc::UniformB([b[2], -b[1], b[0]]),
            None => PotentialBc::Zero,
        };
        for tag in entry.tag.tags().map_err(ConfigError)? {
            spec.potential_bc.insert(tag, bc.clone());
        }
    }
    for entry in &cfg.boundary.surface_h {
        for tag in entry.tag.tags().map_err(ConfigError)? {
            spec.surface_h.insert(tag, entry.h);
        }
    }
    for entry in &cfg.sources.body_force {
        spec.body_force.insert(entry.region, SourceDensity::Constant(entry.force_per_volume));
    }
    for entry in &cfg.sources.current_density {
        spec.current.insert(entry.region, SourceDensity::Constant(entry.j));
    }
    spec.validate().map_err(|e| ConfigError(format!("{e}")))?;
    Ok(spec)
}
