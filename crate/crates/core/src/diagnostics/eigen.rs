use crate::numerics::{Complex64, NumericsError};
use crate::statespace::{LinearModel, ModelKind};
use serde::{Deserialize, Serialize};

/// Thresholds used to cluster and classify eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenTolerances {
    /// Relative merge distance, scaled by `max(1, |λ|)`.
    pub cluster: f64,
    /// Distance from the integrator point (0, or 1 for discrete models)
    /// below which an eigenvalue counts as an integrator. Also the
    /// imaginary-part threshold for the oscillatory flag.
    pub integrator: f64,
    /// Margin past the stability boundary before a mode is unstable.
    pub stability: f64,
}

impl EigenTolerances {
    pub fn continuous() -> Self {
        Self {
            cluster: 1e-6,
            integrator: 1e-5,
            stability: 0.0,
        }
    }

    pub fn discrete() -> Self {
        Self {
            integrator: 1e-4,
            ..Self::continuous()
        }
    }

    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Continuous => Self::continuous(),
            ModelKind::Discrete => Self::discrete(),
        }
    }
}

/// Classification set of one eigenvalue. Flags can combine, e.g. an
/// unstable oscillatory pair. `stable` means neither unstable nor an
/// integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub stable: bool,
    pub unstable: bool,
    pub integrator: bool,
    pub oscillatory: bool,
}

impl Classification {
    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.stable {
            v.push("stable");
        }
        if self.unstable {
            v.push("unstable");
        }
        if self.integrator {
            v.push("integrator");
        }
        if self.oscillatory {
            v.push("oscillatory");
        }
        v
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.labels().join("+"))
    }
}

pub fn classify_ct(lambda: Complex64, tol_int: f64, tol_stab: f64) -> Classification {
    let unstable = lambda.re > tol_stab;
    let integrator = lambda.norm() < tol_int;
    Classification {
        stable: !unstable && !integrator,
        unstable,
        integrator,
        oscillatory: lambda.im.abs() > tol_int,
    }
}

/// Discrete counterpart of [`classify_ct`]. A negative real part counts as
/// oscillatory on its own, since such a mode alternates sign every sample.
pub fn classify_dt(z: Complex64, tol_int: f64, tol_stab: f64) -> Classification {
    let unstable = z.norm() > 1.0 + tol_stab;
    let integrator = (z - 1.0).norm() < tol_int;
    Classification {
        stable: !unstable && !integrator,
        unstable,
        integrator,
        oscillatory: z.re < 0.0 || z.im.abs() > tol_int,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    /// Mean of the merged eigenvalues.
    pub value: Complex64,
    pub multiplicity: usize,
    pub modulus: f64,
    pub classes: Classification,
    /// Real part below zero.
    pub lhp: bool,
    /// Imaginary part above the integrator tolerance.
    pub imag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub kind: ModelKind,
    pub tolerances: EigenTolerances,
    pub clusters: Vec<EigenCluster>,
}

impl EigenReport {
    pub fn total_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    pub fn count(&self, pred: impl Fn(&Classification) -> bool) -> usize {
        self.clusters
            .iter()
            .filter(|c| pred(&c.classes))
            .map(|c| c.multiplicity)
            .sum()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Clusters and classifies a given spectrum.
pub fn report_from_values(
    values: &[Complex64],
    kind: ModelKind,
    tol: EigenTolerances,
) -> EigenReport {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let scale = values[i].norm().max(values[j].norm()).max(1.0);
            if (values[i] - values[j]).norm() <= tol.cluster * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(values[i]),
            None => groups.push((r, vec![values[i]])),
        }
    }
    let mut clusters: Vec<EigenCluster> = groups
        .into_iter()
        .map(|(_, members)| {
            let value = members.iter().sum::<Complex64>() / members.len() as f64;
            let classes = match kind {
                ModelKind::Continuous => classify_ct(value, tol.integrator, tol.stability),
                ModelKind::Discrete => classify_dt(value, tol.integrator, tol.stability),
            };
            EigenCluster {
                value,
                multiplicity: members.len(),
                modulus: value.norm(),
                classes,
                lhp: value.re < 0.0,
                imag: value.im.abs() > tol.integrator,
            }
        })
        .collect();
    match kind {
        ModelKind::Continuous => clusters.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        }),
        ModelKind::Discrete => clusters.sort_by(|a, b| {
            a.modulus
                .total_cmp(&b.modulus)
                .then(a.value.im.total_cmp(&b.value.im))
        }),
    }
    EigenReport {
        kind,
        tolerances: tol,
        clusters,
    }
}

pub fn eigen_report(
    model: &LinearModel,
    tol: EigenTolerances,
) -> Result<EigenReport, NumericsError> {
    Ok(report_from_values(&model.eigenvalues()?, model.kind(), tol))
}
