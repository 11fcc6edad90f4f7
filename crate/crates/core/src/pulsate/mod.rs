//! Pulsating waves of the periodic equation: pinned wave-coordinate solver,
//! tail decay, direct simulation, direction sweeps, homogenization ladders
//! and the sub/supersolution check.

mod decay;
mod direct;
mod frame;
mod strip;
mod subsuper;
mod sweep;

pub use decay::{measure_decay, DecayReport, MIN_TAIL_POINTS, TAIL_WINDOW};
pub use direct::{direct_simulation, relax_periodic, DirectParams, DirectRun, MIN_R2};
pub use frame::{
    check_stable_states, default_half_width, pulsating_speed, InitialProfile, Method, ProfileFrame,
    PulsateParams, SpeedMeasurement, SpeedStatus, TrackingFit, PROFILE_RANGE,
};
pub use subsuper::{
    rho, rho_prime, rho_second, sub_super_params, verify_subsupersolution, CheckGrid, SubSuperParams,
    SubSuperReport,
};
pub use sweep::{
    direction_sweep, epsilon_ladder, h1_distance, LadderEntry, LadderRow, LadderTable, SweepRow, SweepTable,
    ZERO_SPEED_TOL,
};
