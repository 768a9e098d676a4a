use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::angle::PolAngle;
use crate::error::{Error, Result};

/// Tolerance on the total mass of a mixture.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Angles closer than this (modulo π) are merged by [`HvMixture::merged`].
const MERGE_TOLERANCE: f64 = 1e-12;

/// One delta atom of a hidden-variable distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: PolAngle,
    pub weight: f64,
}

impl Atom {
    pub fn new(angle: PolAngle, weight: f64) -> Self {
        Atom { angle, weight }
    }
}

/// Distribution of the hidden polarization angle: a finite set of delta
/// atoms plus an optional flat component of density 1/π on (−π/2, π/2].
///
/// Always normalized; every constructor checks the total mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HvMixture {
    atoms: Vec<Atom>,
    uniform_weight: f64,
}

impl HvMixture {
    pub fn new(atoms: Vec<Atom>, uniform_weight: f64) -> Result<Self> {
        check_weight(uniform_weight)?;
        for atom in &atoms {
            check_weight(atom.weight)?;
        }
        let mixture = HvMixture {
            atoms,
            uniform_weight,
        };
        mixture.check_normalized()?;
        Ok(mixture)
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        Self::new(atoms, 0.0)
    }

    /// The rotationally symmetric distribution q(λ) = 1/π.
    pub fn uniform() -> Self {
        HvMixture {
            atoms: Vec::new(),
            uniform_weight: 1.0,
        }
    }

    /// A single atom carrying all the mass.
    pub fn point(angle: PolAngle) -> Self {
        HvMixture {
            atoms: vec![Atom::new(angle, 1.0)],
            uniform_weight: 0.0,
        }
    }

    /// Convex combination `Σ c_i · q_i`. Coefficients must be non-negative
    /// and sum to one.
    pub fn convex(parts: &[(f64, &HvMixture)]) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut uniform_weight = 0.0;
        for &(c, q) in parts {
            check_weight(c)?;
            uniform_weight += c * q.uniform_weight;
            atoms.extend(q.atoms.iter().map(|a| Atom::new(a.angle, c * a.weight)));
        }
        Self::new(atoms, uniform_weight)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn uniform_weight(&self) -> f64 {
        self.uniform_weight
    }

    pub fn total_mass(&self) -> f64 {
        self.uniform_weight + self.atoms.iter().map(|a| a.weight).sum::<f64>()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Unnormalized(mass));
        }
        Ok(())
    }

    /// Combines atoms at coincident angles (modulo π), drops zero-weight
    /// atoms and sorts by angle.
    pub fn merged(&self) -> HvMixture {
        let mut sorted: Vec<Atom> = self
            .atoms
            .iter()
            .copied()
            .filter(|a| a.weight > 0.0)
            .collect();
        sorted.sort_by(|x, y| x.angle.radians().total_cmp(&y.angle.radians()));
        let mut out: Vec<Atom> = Vec::with_capacity(sorted.len());
        for atom in sorted {
            match out.last_mut() {
                Some(last) if circular_distance(last.angle, atom.angle) < MERGE_TOLERANCE => {
                    last.weight += atom.weight;
                }
                _ => out.push(atom),
            }
        }
        // the interval wraps: an atom just above −π/2 coincides with one at π/2
        if out.len() > 1 {
            let (first, last) = (out[0], out[out.len() - 1]);
            if circular_distance(first.angle, last.angle) < MERGE_TOLERANCE {
                let n = out.len();
                out[n - 1].weight += first.weight;
                out.remove(0);
            }
        }
        HvMixture {
            atoms: out,
            uniform_weight: self.uniform_weight,
        }
    }

    /// Whether two mixtures describe the same distribution after merging.
    pub fn approx_eq(&self, other: &HvMixture, tol: f64) -> bool {
        let (a, b) = (self.merged(), other.merged());
        (a.uniform_weight - b.uniform_weight).abs() <= tol
            && a.atoms.len() == b.atoms.len()
            && a.atoms.iter().zip(&b.atoms).all(|(x, y)| {
                circular_distance(x.angle, y.angle) <= tol && (x.weight - y.weight).abs() <= tol
            })
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight(w))
    }
}

/// Distance between two polarization angles on the period-π circle.
pub(crate) fn circular_distance(x: PolAngle, y: PolAngle) -> f64 {
    let d = (x.radians() - y.radians()).rem_euclid(PI);
    d.min(PI - d)
}

/// Setting-dependent hidden-variable distribution left behind by a set of
/// polarizing beam splitters: every setting `s` with station weight `w`
/// contributes atoms `(s, w/2)` and `(s − π/2, w/2)`.
///
/// `weights = None` gives every setting equal weight.
pub fn texture_mixture(settings: &[PolAngle], weights: Option<&[f64]>) -> Result<HvMixture> {
    if settings.is_empty() {
        return Err(Error::NoSettings);
    }
    let equal;
    let weights = match weights {
        Some(w) => {
            if w.len() != settings.len() {
                return Err(Error::LengthMismatch {
                    settings: settings.len(),
                    weights: w.len(),
                });
            }
            w
        }
        None => {
            equal = vec![1.0 / settings.len() as f64; settings.len()];
            &equal[..]
        }
    };
    let mut atoms = Vec::with_capacity(2 * settings.len());
    for (&s, &w) in settings.iter().zip(weights) {
        check_weight(w)?;
        atoms.push(Atom::new(s, w / 2.0));
        atoms.push(Atom::new(s.orthogonal(), w / 2.0));
    }
    HvMixture::from_atoms(atoms)
}
