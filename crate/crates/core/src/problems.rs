//! The two benchmark contact problems on the unit square.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_constraints, assemble_dirichlet_lift, assemble_load, assemble_operator, Method};
use crate::elasticity::{strain, stress, Material, Tensor2};
use crate::error::{Error, Result};
use crate::solver::ComplementaritySystem;
use crate::mesh::{BoundarySpec, BoundaryTag, Mesh, Point};
use crate::space::{edge_barycentric, DiscreteField, EdgeRule, ElementGeometry, TriangleRule};

pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
/// Traction given the point and the outward normal.
pub type TractionField = Arc<dyn Fn(Point, [f64; 2]) -> [f64; 2] + Send + Sync>;
pub type GradientField = Arc<dyn Fn(Point) -> Tensor2 + Send + Sync>;

#[derive(Clone)]
pub struct ExactSolution {
    pub value: VectorField,
    /// `grad[i][j] = ∂_j u_i`
    pub gradient: GradientField,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub material: Material,
    pub boundary: BoundarySpec,
    /// Signed gap: admissible normal displacements satisfy `u·n_c ≤ gap`.
    pub gap: ScalarField,
    /// Points on the contact boundary where the gap has a kink.
    pub gap_kinks: Vec<Point>,
    pub dirichlet: VectorField,
    pub traction: TractionField,
    pub force: VectorField,
    pub exact: Option<ExactSolution>,
    pub default_initial_n: usize,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("material", &self.material)
            .field("contact_normal", &self.boundary.contact_normal())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn contact_normal(&self) -> [f64; 2] {
        self.boundary.contact_normal()
    }

    pub fn initial_mesh(&self, n: usize) -> Result<Mesh> {
        Mesh::unit_square(n, &self.boundary)
    }

    /// Operator, load (including Dirichlet data) and contact constraints on
    /// `mesh`. Data integrals use rules exact to `degree`.
    pub fn discretize(&self, mesh: &Mesh, method: Method, penalty: f64, degree: usize) -> Result<ComplementaritySystem> {
        let op = assemble_operator(mesh, &self.material, method, penalty)?;
        let mut load = assemble_load(mesh, &*self.force, &*self.traction, degree).values;
        let lift = assemble_dirichlet_lift(mesh, &self.material, method, penalty, &*self.dirichlet, degree);
        for (l, d) in load.iter_mut().zip(lift) {
            *l += d;
        }
        let cons = assemble_constraints(mesh, self.contact_normal(), &*self.gap, &self.gap_kinks)?;
        Ok(ComplementaritySystem::new(op, load, cons))
    }
}

/// Parameter overrides read from a configuration file. Fields that do not
/// apply to the selected problem are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOverrides {
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    pub young: Option<f64>,
    pub poisson: Option<f64>,
    pub gap_offset: Option<f64>,
    pub wedge_tip: Option<f64>,
    pub dirichlet_displacement: Option<[f64; 2]>,
}

const EPS: f64 = 1e-12;

/// Clamped on top, in contact with a flat rigid foundation at the bottom,
/// manufactured solution `u = (y²(y-1), (x-2)y(1-y)eʸ)`.
pub fn model_problem_1() -> ProblemSpec {
    model_problem_1_with(&ProblemOverrides::default()).expect("default parameters are valid")
}

pub fn model_problem_1_with(o: &ProblemOverrides) -> Result<ProblemSpec> {
    if o.young.is_some() || o.poisson.is_some() || o.gap_offset.is_some() || o.wedge_tip.is_some() || o.dirichlet_displacement.is_some() {
        return Err(Error::InvalidParameter(
            "problem 1 accepts only mu and lambda overrides".into(),
        ));
    }
    let mat = Material::new(o.mu.unwrap_or(1.0), o.lambda.unwrap_or(1.0))?;
    let (mu, lambda) = (mat.mu, mat.lambda);
    let boundary = BoundarySpec::new([0.0, -1.0], |p| {
        if p[1] < EPS {
            BoundaryTag::Contact
        } else if p[1] > 1.0 - EPS {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    })?;
    let value: VectorField = Arc::new(|p: Point| {
        let (x, y) = (p[0], p[1]);
        [y * y * (y - 1.0), (x - 2.0) * y * (1.0 - y) * y.exp()]
    });
    let gradient: GradientField = Arc::new(|p: Point| {
        let (x, y) = (p[0], p[1]);
        let e = y.exp();
        Tensor2([
            [0.0, 3.0 * y * y - 2.0 * y],
            [y * (1.0 - y) * e, (x - 2.0) * e * (1.0 - y - y * y)],
        ])
    });
    let force: VectorField = Arc::new(move |p: Point| {
        let (x, y) = (p[0], p[1]);
        let e = y.exp();
        [
            -(lambda + mu) * e * (1.0 - y - y * y) - mu * (6.0 * y - 2.0),
            (2.0 * mu + lambda) * (x - 2.0) * e * (3.0 * y + y * y),
        ]
    });
    let g = gradient.clone();
    let traction: TractionField = Arc::new(move |p, n| stress(strain(g(p)), &mat).mul_vec(n));
    Ok(ProblemSpec {
        name: "problem1".into(),
        material: mat,
        boundary,
        gap: Arc::new(|_| 0.0),
        gap_kinks: Vec::new(),
        dirichlet: value.clone(),
        traction,
        force,
        exact: Some(ExactSolution { value, gradient }),
        default_initial_n: 1,
    })
}

/// Body pressed against a rigid wedge on its right side, displaced on the
/// left, traction free on top and bottom.
pub fn model_problem_2() -> ProblemSpec {
    model_problem_2_with(&ProblemOverrides::default()).expect("default parameters are valid")
}

pub fn model_problem_2_with(o: &ProblemOverrides) -> Result<ProblemSpec> {
    let mat = match (o.mu, o.lambda) {
        (None, None) => Material::from_young_poisson(o.young.unwrap_or(500.0), o.poisson.unwrap_or(0.3))?,
        (Some(mu), Some(lambda)) if o.young.is_none() && o.poisson.is_none() => Material::new(mu, lambda)?,
        _ => {
            return Err(Error::InvalidParameter(
                "give either young/poisson or both mu and lambda".into(),
            ))
        }
    };
    let offset = o.gap_offset.unwrap_or(-0.2);
    let tip = o.wedge_tip.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&tip) {
        return Err(Error::InvalidParameter(format!("wedge tip {tip} outside (0, 1)")));
    }
    let ud = o.dirichlet_displacement.unwrap_or([-0.1, 0.0]);
    let boundary = BoundarySpec::new([1.0, 0.0], |p| {
        if p[0] > 1.0 - EPS {
            BoundaryTag::Contact
        } else if p[0] < EPS {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    })?;
    Ok(ProblemSpec {
        name: "problem2".into(),
        material: mat,
        boundary,
        gap: Arc::new(move |p| offset + (tip - p[1]).abs()),
        gap_kinks: vec![[1.0, tip]],
        dirichlet: Arc::new(move |_| ud),
        traction: Arc::new(|_, _| [0.0, 0.0]),
        force: Arc::new(|_| [0.0, 0.0]),
        exact: None,
        default_initial_n: 4,
    })
}

pub fn model_problem(number: u32, o: &ProblemOverrides) -> Result<ProblemSpec> {
    match number {
        1 => model_problem_1_with(o),
        2 => model_problem_2_with(o),
        _ => Err(Error::InvalidParameter(format!("unknown problem {number}"))),
    }
}

/// Squared error contributions against the exact solution.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DgError {
    /// Σ_K ∫ σ(e):ε(e)
    pub energy: f64,
    /// Σ_{E_h^0} h_e⁻¹ ‖⟦e⟧‖²
    pub jump: f64,
    /// Σ_{E_h^0} h_e ‖{ε(e)}‖²
    pub average: f64,
}

impl DgError {
    /// Energy plus jump norm.
    pub fn norm(&self) -> f64 {
        (self.energy + self.jump).sqrt()
    }

    /// Three-term norm including the strain averages.
    pub fn full_norm(&self) -> f64 {
        (self.energy + self.jump + self.average).sqrt()
    }
}

/// Error of `u` in the broken energy plus jump norm, with the strain-average
/// term reported separately. Uses rules exact to `degree`.
pub fn compute_dg_error(mesh: &Mesh, u: &DiscreteField, spec: &ProblemSpec, degree: usize) -> Result<DgError> {
    u.check(mesh)?;
    let exact = spec.exact.as_ref().ok_or(Error::NoExactSolution)?;
    let mat = &spec.material;
    let trule = TriangleRule::new(degree);
    let erule = EdgeRule::for_degree(degree);
    let mut err = DgError::default();
    for t in 0..mesh.n_triangles() {
        let geom = ElementGeometry::new(mesh, t);
        for (l, w) in trule.points.iter().zip(&trule.weights) {
            let x = geom.map(*l);
            let eps = strain((exact.gradient)(x)) - strain(u.gradient(&geom, t, *l));
            err.energy += w * 2.0 * geom.area * stress(eps, mat).ddot(&eps);
        }
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !edge.tag.is_penalized() {
            continue;
        }
        let [a, b] = mesh.edge_points(e);
        let sides: Vec<(usize, ElementGeometry)> = std::iter::once(edge.left)
            .chain(edge.right)
            .map(|t| (t, ElementGeometry::new(mesh, t)))
            .collect();
        for (&s, &w) in erule.points.iter().zip(&erule.weights) {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let w = w * edge.length;
            let ue = (exact.value)(x);
            let eps_exact = strain((exact.gradient)(x));
            let mut jump = [0.0; 2];
            let mut avg = Tensor2::ZERO;
            for (k, (t, geom)) in sides.iter().enumerate() {
                let l = edge_barycentric(mesh, *t, e, s);
                let v = u.value(*t, l);
                let sign = if k == 0 { 1.0 } else { -1.0 };
                jump[0] += sign * (ue[0] - v[0]);
                jump[1] += sign * (ue[1] - v[1]);
                avg += (eps_exact - strain(u.gradient(geom, *t, l))) * (1.0 / sides.len() as f64);
            }
            if sides.len() == 1 {
                // on Dirichlet edges the exact trace is the boundary datum
                let d = (spec.dirichlet)(x);
                let v = u.value(sides[0].0, edge_barycentric(mesh, sides[0].0, e, s));
                jump = [d[0] - v[0], d[1] - v[1]];
            }
            err.jump += w * (jump[0] * jump[0] + jump[1] * jump[1]) / edge.length;
            err.average += w * edge.length * avg.ddot(&avg);
        }
    }
    Ok(err)
}
