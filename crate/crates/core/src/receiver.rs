//! Receiver-level physics: surface conditions, the end-to-end solve
//! pipeline, flux recovery and the energy audit.
//!
//! Every surface exchanges heat through the same Robin form
//! `-lambda dT/dn = h (T - T_inf) - q`, which assembly consumes as
//! `(h, c = h T_inf + q)`. The audit needs `h`, `T_inf` and `q` separately
//! (the combined `c` cannot be split once `h` is zero), so the per-surface
//! triple is kept alongside the reduced pair.

use std::collections::BTreeMap;

use crate::assembly::{assemble, solve_with_tolerance, RobinBc, RESIDUAL_TOLERANCE};
use crate::elements::{shape_coefficients, CylMethod};
use crate::error::{Error, Result};
use crate::mesh::{generate_mesh, renumber_bandwidth, Mesh, ReceiverGeometry, SurfaceTag};

/// One surface's exchange parameters: film coefficient, far-field
/// temperature and imposed inward flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceLoad {
    pub h: f64,
    pub t_inf: f64,
    pub q: f64,
}

impl SurfaceLoad {
    /// Reduces the triple to the `(h, c)` pair assembly works with.
    pub fn to_robin(self) -> RobinBc {
        RobinBc {
            h: self.h,
            c: self.h * self.t_inf + self.q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h >= 0.0) || !self.h.is_finite() {
            return Err(Error::Config(format!(
                "film coefficient must be non-negative and finite (got {})",
                self.h
            )));
        }
        if !(self.t_inf > 0.0) || !self.t_inf.is_finite() {
            return Err(Error::Config(format!(
                "far-field temperature must be positive (got {} K)",
                self.t_inf
            )));
        }
        if !self.q.is_finite() {
            return Err(Error::Config(format!(
                "imposed flux must be finite (got {})",
                self.q
            )));
        }
        Ok(())
    }
}

/// Physical data of a cavity receiver run.
///
/// The cavity walls (surfaces A and C) see hot air plus the concentrated
/// flux absorbed from the dish; the bottom (E) feeds the engine heater
/// through an effective exchange coefficient; the outer shell (D) leaks to
/// ambient; the aperture opening (B) is configurable and insulated by
/// default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePhysics {
    /// Film coefficient between cavity air and the irradiated walls (A, C).
    pub cavity_coefficient: f64,
    /// Cavity air temperature, K.
    pub cavity_air_temperature: f64,
    /// Concentrated flux absorbed by the cavity walls, W/m^2.
    pub absorbed_flux: f64,
    /// Effective exchange coefficient towards the working gas (E).
    pub exchanger_coefficient: f64,
    /// Working gas temperature, K.
    pub gas_temperature: f64,
    /// Loss coefficient of the insulated outer shell (D).
    pub loss_coefficient: f64,
    /// Ambient temperature, K.
    pub ambient_temperature: f64,
    /// Exchange at the aperture opening (B).
    pub aperture: SurfaceLoad,
}

impl SurfacePhysics {
    pub fn validate(&self) -> Result<()> {
        let coefficients = [
            ("cavity", self.cavity_coefficient),
            ("exchanger", self.exchanger_coefficient),
            ("loss", self.loss_coefficient),
            ("aperture", self.aperture.h),
        ];
        for (name, h) in coefficients {
            if !(h >= 0.0) || !h.is_finite() {
                return Err(Error::Config(format!(
                    "{name} film coefficient must be non-negative and finite (got {h})"
                )));
            }
        }
        let temperatures = [
            ("cavity air", self.cavity_air_temperature),
            ("working gas", self.gas_temperature),
            ("ambient", self.ambient_temperature),
            ("aperture far-field", self.aperture.t_inf),
        ];
        for (name, t) in temperatures {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config(format!(
                    "{name} temperature must be positive (got {t} K)"
                )));
            }
        }
        for (name, q) in [
            ("absorbed", self.absorbed_flux),
            ("aperture", self.aperture.q),
        ] {
            if !q.is_finite() {
                return Err(Error::Config(format!(
                    "{name} flux must be finite (got {q})"
                )));
            }
        }
        if self.absorbed_flux < 0.0 {
            return Err(Error::Config(format!(
                "absorbed flux must be non-negative (got {})",
                self.absorbed_flux
            )));
        }
        Ok(())
    }

    /// Per-surface exchange triples for all five tags.
    pub fn surface_loads(&self) -> BTreeMap<SurfaceTag, SurfaceLoad> {
        let cavity = SurfaceLoad {
            h: self.cavity_coefficient,
            t_inf: self.cavity_air_temperature,
            q: self.absorbed_flux,
        };
        let mut loads = BTreeMap::new();
        loads.insert(SurfaceTag::A, cavity);
        loads.insert(SurfaceTag::B, self.aperture);
        loads.insert(SurfaceTag::C, cavity);
        loads.insert(
            SurfaceTag::D,
            SurfaceLoad {
                h: self.loss_coefficient,
                t_inf: self.ambient_temperature,
                q: 0.0,
            },
        );
        loads.insert(
            SurfaceTag::E,
            SurfaceLoad {
                h: self.exchanger_coefficient,
                t_inf: self.gas_temperature,
                q: 0.0,
            },
        );
        loads
    }

    /// The reduced `(h, c)` map assembly consumes.
    pub fn robin_map(&self) -> BTreeMap<SurfaceTag, RobinBc> {
        self.surface_loads()
            .into_iter()
            .map(|(tag, load)| (tag, load.to_robin()))
            .collect()
    }
}

/// Solved temperatures tied to the mesh they were computed on, plus the
/// recovered per-element flux.
#[derive(Debug, Clone)]
pub struct TemperatureField {
    pub mesh: Mesh,
    /// Nodal temperatures indexed by node id.
    pub temperatures: Vec<f64>,
    /// Per-element `(q_r, q_z)`, constant over each linear triangle.
    pub element_flux: Vec<[f64; 2]>,
}

impl TemperatureField {
    pub fn min_temperature(&self) -> f64 {
        self.temperatures
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_temperature(&self) -> f64 {
        self.temperatures
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Recovers `q = -lambda grad T` element by element; exact for the linear
/// interpolant, so constant per triangle.
pub fn element_heat_flux(
    mesh: &Mesh,
    temperatures: &[f64],
    conductivities: &[f64],
) -> Result<Vec<[f64; 2]>> {
    if temperatures.len() != mesh.node_count() {
        return Err(Error::Domain(format!(
            "temperature vector has {} entries for a mesh with {} nodes",
            temperatures.len(),
            mesh.node_count()
        )));
    }
    let mut flux = Vec::with_capacity(mesh.element_count());
    for (eid, element) in mesh.elements.iter().enumerate() {
        let lambda = *conductivities.get(element.material_id).ok_or_else(|| {
            Error::Material(format!(
                "element {eid} references material {} but only {} conductivities were given",
                element.material_id,
                conductivities.len()
            ))
        })?;
        let p = mesh.element_points(element);
        let c = shape_coefficients(&p)?;
        let mut grad = [0.0, 0.0];
        for i in 0..3 {
            let t = temperatures[element.nodes[i]];
            grad[0] += t * c.b[i];
            grad[1] += t * c.c[i];
        }
        flux.push([-lambda * grad[0], -lambda * grad[1]]);
    }
    Ok(flux)
}

/// Surface-resolved heat budget. Rates are in watts over the full ring
/// (boundary integrals carry the `2 pi r` measure); positive means heat
/// leaving the solid.
#[derive(Debug, Clone)]
pub struct EnergyBalance {
    pub per_surface: BTreeMap<SurfaceTag, f64>,
    /// Sum of all surface rates; zero for a perfectly closed budget.
    pub net_imbalance: f64,
    /// Total of the heat-receiving surface rates.
    pub gross_input: f64,
    /// `|net| / gross`, the headline closure figure. Both terms are pure
    /// roundoff for an equilibrium field, so the ratio is only meaningful
    /// when heat actually flows; judge equilibrium runs by `net_imbalance`.
    pub imbalance_fraction: f64,
}

/// Audits the solved field: per surface,
/// `Q = int (h (T - T_inf) - q) 2 pi r ds` by the trapezoid rule on each
/// boundary edge.
pub fn energy_balance(
    field: &TemperatureField,
    loads: &BTreeMap<SurfaceTag, SurfaceLoad>,
) -> Result<EnergyBalance> {
    let mut per_surface: BTreeMap<SurfaceTag, f64> = BTreeMap::new();
    for edge in &field.mesh.boundary {
        let load = loads.get(&edge.tag).ok_or_else(|| {
            Error::Config(format!("no surface data given for surface {}", edge.tag))
        })?;
        let [n0, n1] = edge.nodes;
        let mut rate = 0.0;
        for node_id in [n0, n1] {
            let node = &field.mesh.nodes[node_id];
            let t = field.temperatures[node_id];
            let outflow = load.h * (t - load.t_inf) - load.q;
            rate += outflow * 2.0 * std::f64::consts::PI * node.r * (edge.length / 2.0);
        }
        *per_surface.entry(edge.tag).or_insert(0.0) += rate;
    }
    let net_imbalance: f64 = per_surface.values().sum();
    let gross_input: f64 = per_surface.values().map(|q| (-q).max(0.0)).sum();
    let imbalance_fraction = if gross_input > f64::MIN_POSITIVE {
        net_imbalance.abs() / gross_input
    } else {
        0.0
    };
    Ok(EnergyBalance {
        per_surface,
        net_imbalance,
        gross_input,
        imbalance_fraction,
    })
}

/// Full receiver result.
#[derive(Debug, Clone)]
pub struct ReceiverSolution {
    pub field: TemperatureField,
    pub balance: EnergyBalance,
    pub method: CylMethod,
    pub residual: f64,
    pub used_dense_fallback: bool,
}

/// End-to-end pipeline on an explicit per-surface load map: mesh the
/// section, renumber for bandwidth, assemble with the requested
/// cylindrical treatment, solve to the given residual bound, recover flux
/// and audit the budget.
pub fn solve_receiver_with_loads(
    geometry: &ReceiverGeometry,
    nr: usize,
    nz: usize,
    lambda: f64,
    loads: &BTreeMap<SurfaceTag, SurfaceLoad>,
    method: CylMethod,
    residual_tolerance: f64,
) -> Result<ReceiverSolution> {
    for (tag, load) in loads {
        load.validate()
            .map_err(|e| Error::Config(format!("surface {tag}: {e}")))?;
    }
    let mesh = renumber_bandwidth(generate_mesh(geometry, nr, nz)?);
    let bcs = loads.iter().map(|(tag, l)| (*tag, l.to_robin())).collect();
    let system = assemble(&mesh, method, &[lambda], &bcs)?;
    let solution = solve_with_tolerance(&system, residual_tolerance)?;
    let element_flux = element_heat_flux(&mesh, &solution.temperatures, &[lambda])?;
    let field = TemperatureField {
        mesh,
        temperatures: solution.temperatures,
        element_flux,
    };
    let balance = energy_balance(&field, loads)?;
    Ok(ReceiverSolution {
        field,
        balance,
        method,
        residual: solution.residual,
        used_dense_fallback: solution.used_dense_fallback,
    })
}

/// [`solve_receiver_with_loads`] on the per-tag loads implied by a
/// [`SurfacePhysics`].
pub fn solve_receiver(
    geometry: &ReceiverGeometry,
    nr: usize,
    nz: usize,
    lambda: f64,
    physics: &SurfacePhysics,
    method: CylMethod,
) -> Result<ReceiverSolution> {
    physics.validate()?;
    solve_receiver_with_loads(
        geometry,
        nr,
        nz,
        lambda,
        &physics.surface_loads(),
        method,
        RESIDUAL_TOLERANCE,
    )
}

/// A representative dish receiver: 40 W/(m K) steel, 950 K cavity air,
/// 20 kW/m^2 absorbed by the cavity walls, the heater head coupled to
/// 900 K working gas, a well-insulated outer shell and open edges (bore
/// and crown) losing to ambient through an effective aperture film that
/// lumps convection, re-radiation and spillage. The aperture is the
/// dominant loss channel, so the crown runs coldest while the irradiated
/// cavity walls run hottest.
pub fn representative_receiver() -> (ReceiverGeometry, SurfacePhysics, f64) {
    let geometry = ReceiverGeometry {
        r_min: 0.01,
        r_inner: 0.10,
        r_outer: 0.13,
        bottom_thickness: 0.03,
        wall_height: 0.20,
    };
    let physics = SurfacePhysics {
        cavity_coefficient: 15.0,
        cavity_air_temperature: 950.0,
        absorbed_flux: 2.0e4,
        exchanger_coefficient: 5000.0,
        gas_temperature: 900.0,
        loss_coefficient: 0.5,
        ambient_temperature: 300.0,
        aperture: SurfaceLoad {
            h: 150.0,
            t_inf: 300.0,
            q: 0.0,
        },
    };
    (geometry, physics, 40.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, RectTags};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn robin_reduction_frozen_pairs() {
        // Shell losses: h = 0.5, ambient 300 K, no flux.
        let shell = SurfaceLoad {
            h: 0.5,
            t_inf: 300.0,
            q: 0.0,
        };
        assert_eq!(shell.to_robin(), RobinBc { h: 0.5, c: 150.0 });
        // Cavity wall: h = 15, air 900 K, 150 kW/m^2 absorbed.
        let cavity = SurfaceLoad {
            h: 15.0,
            t_inf: 900.0,
            q: 150.0e3,
        };
        assert_eq!(
            cavity.to_robin(),
            RobinBc {
                h: 15.0,
                c: 163_500.0
            }
        );
    }

    #[test]
    fn surface_loads_cover_all_tags() {
        let (_, physics, _) = representative_receiver();
        let loads = physics.surface_loads();
        for tag in SurfaceTag::ALL {
            assert!(loads.contains_key(&tag), "missing surface {tag}");
        }
        assert_eq!(loads[&SurfaceTag::A], loads[&SurfaceTag::C]);
        assert_eq!(loads[&SurfaceTag::D].h, 0.5);
        assert_eq!(loads[&SurfaceTag::E].t_inf, 900.0);
    }

    #[test]
    fn physics_validation_rejects_bad_inputs() {
        let (_, good, _) = representative_receiver();
        let mut bad = good;
        bad.loss_coefficient = -1.0;
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.gas_temperature = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.absorbed_flux = f64::NAN;
        assert!(bad.validate().is_err());
        assert!(good.validate().is_ok());
    }

    #[test]
    fn equilibrium_field_is_uniform_with_zero_flux() {
        // Every far field at 600 K and no imposed flux: T = 600 K solves
        // the discrete system exactly for all three methods.
        let (geometry, mut physics, lambda) = representative_receiver();
        physics.cavity_air_temperature = 600.0;
        physics.gas_temperature = 600.0;
        physics.ambient_temperature = 600.0;
        physics.absorbed_flux = 0.0;
        physics.aperture = SurfaceLoad {
            h: 15.0,
            t_inf: 600.0,
            q: 0.0,
        };
        for method in [
            CylMethod::ExactIntegral,
            CylMethod::MassCenter,
            CylMethod::ModifiedConductivity,
        ] {
            let sol = solve_receiver(&geometry, 8, 15, lambda, &physics, method).unwrap();
            for t in &sol.field.temperatures {
                assert_abs_diff_eq!(*t, 600.0, epsilon = 1e-8);
            }
            for q in &sol.field.element_flux {
                assert!(q[0].abs() < 1e-6 && q[1].abs() < 1e-6);
            }
            for (tag, rate) in &sol.balance.per_surface {
                assert!(rate.abs() < 1e-5, "surface {tag} leaks {rate} W");
            }
            assert!(sol.balance.net_imbalance.abs() < 1e-5);
        }
    }

    #[test]
    fn flux_recovery_on_linear_field() {
        let tags = RectTags {
            left: SurfaceTag::B,
            right: SurfaceTag::D,
            bottom: SurfaceTag::E,
            top: SurfaceTag::C,
        };
        let mesh = rectangle_mesh(0.5, 1.0, 0.0, 0.1, 4, 3, tags).unwrap();
        let temperatures: Vec<f64> = mesh.nodes.iter().map(|n| 400.0 + 100.0 * n.z).collect();
        let flux = element_heat_flux(&mesh, &temperatures, &[40.0]).unwrap();
        for q in flux {
            assert_abs_diff_eq!(q[0], 0.0, epsilon = 1e-9);
            assert_relative_eq!(q[1], -4000.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn representative_receiver_temperatures_are_physical() {
        let (geometry, physics, lambda) = representative_receiver();
        let sol = solve_receiver(
            &geometry,
            12,
            23,
            lambda,
            &physics,
            CylMethod::ExactIntegral,
        )
        .unwrap();
        let min = sol.field.min_temperature();
        let max = sol.field.max_temperature();
        // Bounded by ambient below and by the hottest far field plus the
        // flux overshoot q / h above.
        let bound = physics.cavity_air_temperature.max(physics.gas_temperature)
            + physics.absorbed_flux
                / physics
                    .cavity_coefficient
                    .min(physics.exchanger_coefficient);
        assert!(min >= physics.ambient_temperature);
        assert!(max <= bound);
        assert!(max > physics.gas_temperature);
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn hottest_nodes_sit_on_irradiated_walls() {
        // Holds at the design flux and at a 150 kW/m^2 overload.
        let (geometry, mut physics, lambda) = representative_receiver();
        for flux in [1.0e4, 150.0e3] {
            physics.absorbed_flux = flux;
            let sol =
                solve_receiver(&geometry, 12, 23, lambda, &physics, CylMethod::MassCenter).unwrap();
            let max = sol.field.max_temperature();
            let mut irradiated = vec![false; sol.field.mesh.node_count()];
            for edge in &sol.field.mesh.boundary {
                if edge.tag == SurfaceTag::A || edge.tag == SurfaceTag::C {
                    irradiated[edge.nodes[0]] = true;
                    irradiated[edge.nodes[1]] = true;
                }
            }
            let arg_max = sol
                .field
                .temperatures
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert!(irradiated[arg_max], "hottest node off the cavity walls");
            assert!(max > physics.gas_temperature);
        }
    }

    #[test]
    fn raising_absorbed_flux_raises_peak_temperature() {
        let (geometry, mut physics, lambda) = representative_receiver();
        let mut last = f64::NEG_INFINITY;
        for flux in [0.0, 1.0e4, 5.0e4] {
            physics.absorbed_flux = flux;
            let sol =
                solve_receiver(&geometry, 8, 15, lambda, &physics, CylMethod::MassCenter).unwrap();
            let max = sol.field.max_temperature();
            assert!(max > last, "peak did not rise with flux");
            last = max;
        }
    }

    #[test]
    fn budget_splits_input_and_output_surfaces() {
        let (geometry, physics, lambda) = representative_receiver();
        let sol = solve_receiver(
            &geometry,
            12,
            23,
            lambda,
            &physics,
            CylMethod::ExactIntegral,
        )
        .unwrap();
        // Cavity walls absorb (negative), exchanger and shell reject.
        assert!(sol.balance.per_surface[&SurfaceTag::A] < 0.0);
        assert!(sol.balance.per_surface[&SurfaceTag::C] < 0.0);
        assert!(sol.balance.per_surface[&SurfaceTag::E] > 0.0);
        assert!(sol.balance.per_surface[&SurfaceTag::D] > 0.0);
        assert!(sol.balance.gross_input > 0.0);
        assert!(sol.balance.imbalance_fraction < 0.05);
    }
}
