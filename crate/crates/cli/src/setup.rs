//! Turns geometry and deformation blocks into library objects.

use std::sync::Arc;

use spinlab::analysis::catalog::{nodal_catalog, positive_catalog, torus_sine};
use spinlab::{decompose_deformation, make_torus, Field, FieldContainer, Geometry};

use crate::config::{DeformationConfig, GeometryConfig, Profile};
use crate::error::CliError;

pub fn geometry(cfg: &GeometryConfig) -> Result<Arc<Geometry>, CliError> {
    Ok(make_torus(cfg.dim, &cfg.radii, &cfg.grid, &cfg.spin_structure())?)
}

/// Same geometry with the last circle resampled at `n` points.
pub fn with_last_resolution(cfg: &GeometryConfig, n: usize) -> GeometryConfig {
    let mut out = cfg.clone();
    if let Some(last) = out.grid.last_mut() {
        *last = n;
    }
    out
}

fn require_two_dimensions(geom: &Geometry, what: &str) -> Result<(), CliError> {
    if geom.dim() != 2 {
        return Err(CliError::Task(format!("{what} is defined on two-dimensional tori only")));
    }
    Ok(())
}

pub fn deformation(geom: &Arc<Geometry>, cfg: &DeformationConfig) -> Result<Field, CliError> {
    match cfg {
        DeformationConfig::Constant { mu } => Ok(Field::constant(geom, *mu)),
        DeformationConfig::CircleProfile { profile, mode, tau, mu } => {
            let last = geom.dim() - 1;
            let k = f64::from(*mode) / geom.radii()[last];
            let raw = match profile {
                Profile::Cos => Field::from_fn(geom, |x| (k * x[last]).cos()),
                Profile::Sin => Field::from_fn(geom, |x| (k * x[last]).sin()),
            };
            let h = decompose_deformation(&raw)?.h;
            Ok(h.scale(*tau).add_constant(*mu))
        }
        DeformationConfig::TorusSine { a, tau } => {
            require_two_dimensions(geom, "torus_sine")?;
            Ok(torus_sine(geom, *a, *tau))
        }
        DeformationConfig::Custom { samples: Some(samples), .. } => Ok(Field::from_real_samples(geom, samples.clone())?),
        DeformationConfig::Custom { file: Some(path), .. } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let container = FieldContainer::from_json(&text)?;
            let field = Field::from_container(geom, &container)?;
            if !field.is_real() {
                return Err(CliError::Task(format!("{}: deformation samples must be real", path.display())));
            }
            Ok(field)
        }
        DeformationConfig::Custom { .. } => Err(CliError::Config("custom deformation without samples".into())),
        DeformationConfig::Catalog { name } => {
            require_two_dimensions(geom, "the deformation catalog")?;
            positive_catalog(geom)
                .into_iter()
                .chain(nodal_catalog(geom))
                .find(|e| e.name == name)
                .map(|e| e.f)
                .ok_or_else(|| CliError::Task(format!("no catalog deformation named '{name}'")))
        }
    }
}

/// Names accepted by `kind = "catalog"`.
pub fn catalog_names() -> Vec<&'static str> {
    let g = Geometry::unit_periodic(2, 4).expect("valid geometry");
    positive_catalog(&g).iter().chain(nodal_catalog(&g).iter()).map(|e| e.name).collect()
}
