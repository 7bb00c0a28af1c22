use zeno_soliton::observables::{center_of_mass, com_velocity, norm};
use zeno_soliton::{
    analytic_soliton, init_soliton, BeamSpec, ObservableSchedule, PhysicalConstants, Propagator, SolitonSpec,
    SpatialGrid, TimeParams, Trajectory,
};

const QUIET: ObservableSchedule = ObservableSchedule {
    snapshot_stride: 0,
    com_stride: 0,
    incoming: None,
};

fn evolve(grid: &SpatialGrid, v: f64, x0: f64, beam: &BeamSpec, dt: f64, t: f64) -> Trajectory {
    let c = PhysicalConstants::default();
    let field = init_soliton(grid, &SolitonSpec::normalized(v, x0, &c), &c).unwrap();
    let mut prop = Propagator::new(grid, dt, c).unwrap();
    prop.evolve(field, &TimeParams::fixed(dt, t), beam, &QUIET).unwrap()
}

#[test]
fn lossless_evolution_is_unitary() {
    let grid = SpatialGrid::new(-40.0, 40.0, 1024).unwrap();
    let traj = evolve(&grid, -0.25, 10.0, &BeamSpec::gaussian(0.0, 0.0, 0.1), 0.01, 20.0);
    let drift = traj.norms.iter().map(|&(_, n)| (n - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-12, "norm drift {drift:e}");
}

#[test]
fn norm_never_grows_with_loss() {
    let grid = SpatialGrid::new(-40.0, 40.0, 1024).unwrap();
    let traj = evolve(&grid, -0.25, 10.0, &BeamSpec::gaussian(100.0, 0.0, 0.2), 0.01, 80.0);
    for pair in traj.norms.windows(2) {
        assert!(pair[1].1 <= pair[0].1 + 1e-14, "norm grew at t={}", pair[1].0);
    }
    assert!(traj.final_norm() < 0.99);
}

#[test]
fn resting_soliton_keeps_its_shape() {
    let grid = SpatialGrid::new(-40.0, 40.0, 2048).unwrap();
    let c = PhysicalConstants::default();
    let spec = SolitonSpec::normalized(0.0, 0.0, &c);
    let t = 10.0;
    let traj = evolve(&grid, 0.0, 0.0, &BeamSpec::gaussian(0.0, 20.0, 0.1), 0.002, t);
    let worst = traj
        .field
        .psi
        .iter()
        .zip(grid.positions())
        .map(|(z, &x)| (z.norm() - analytic_soliton(x, 0.0, &spec, &c).norm()).abs())
        .fold(0.0, f64::max);
    assert!(worst / t < 1e-8, "envelope drift per unit time {:e}", worst / t);
}

#[test]
fn free_soliton_moves_at_its_velocity() {
    let grid = SpatialGrid::new(-40.0, 40.0, 2048).unwrap();
    let (v, x0) = (-0.25, 10.0);
    let dt = 0.005;
    let c = PhysicalConstants::default();
    let mut field = init_soliton(&grid, &SolitonSpec::normalized(v, x0, &c), &c).unwrap();
    let mut prop = Propagator::new(&grid, dt, c).unwrap();
    let beam = BeamSpec::gaussian(0.0, -30.0, 0.1);
    let region = (-40.0, 40.0);
    let mut samples = vec![(0.0, center_of_mass(&grid, &field, region).unwrap())];
    for step in 1..=4000 {
        prop.step(&mut field, &beam).unwrap();
        if step % 200 == 0 {
            samples.push((field.t, center_of_mass(&grid, &field, region).unwrap()));
        }
    }
    let (t, x) = *samples.last().unwrap();
    assert!((x - (x0 + v * t)).abs() < 1e-3, "COM {x} at t={t}");
    let fitted = com_velocity(&samples, (0.0, t)).unwrap();
    assert!((fitted - v).abs() < 1e-3, "fitted velocity {fitted}");
    let n = norm(&grid, &field);
    assert!((n - 1.0).abs() < 1e-10, "norm {n}");
}

#[test]
fn resting_soliton_has_no_velocity() {
    let grid = SpatialGrid::new(-40.0, 40.0, 1024).unwrap();
    let c = PhysicalConstants::default();
    let mut field = init_soliton(&grid, &SolitonSpec::normalized(0.0, 3.0, &c), &c).unwrap();
    let mut prop = Propagator::new(&grid, 0.01, c).unwrap();
    let beam = BeamSpec::gaussian(0.0, -30.0, 0.1);
    let mut samples = Vec::new();
    for step in 0..1000 {
        if step % 50 == 0 {
            samples.push((field.t, center_of_mass(&grid, &field, (-40.0, 40.0)).unwrap()));
        }
        prop.step(&mut field, &beam).unwrap();
    }
    let v = com_velocity(&samples, (0.0, 10.0)).unwrap();
    assert!(v.abs() < 1e-10, "velocity {v:e}");
}

#[test]
fn spectral_refinement_changes_little() {
    let beam = BeamSpec::gaussian(100.0, 0.0, 0.2);
    let coarse = SpatialGrid::new(-40.0, 40.0, 1024).unwrap();
    let fine = SpatialGrid::new(-40.0, 40.0, 2048).unwrap();
    let a = evolve(&coarse, -0.25, 10.0, &beam, 0.01, 60.0).final_norm();
    let b = evolve(&fine, -0.25, 10.0, &beam, 0.01, 60.0).final_norm();
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}
