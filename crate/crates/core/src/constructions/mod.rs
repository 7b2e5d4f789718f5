//! Families of planes and point clouds modelling the hypotheses and the
//! sharp examples.

mod cantor;
mod sets;
mod subsets;

pub use cantor::{cantor_code_family, frostman_constant, levels_for_resolution, CantorSet, FrostmanReport};
pub use sets::{
    cube_skeleton, distance_r_set, farey, lattice_centers, scaled_axis_parallel_counterexample, seeded_rotation,
    skeleton_union_cloud, Counterexample, DistanceBase, DistanceFamilySpec,
};
pub use subsets::{
    furstenberg_cloud, furstenberg_offset, plane_clouds, plane_subset_cantor, sharpness_family, union_cloud,
    FurstenbergSet,
};
