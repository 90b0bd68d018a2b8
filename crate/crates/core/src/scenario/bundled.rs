//! Scenarios shipped with the crate, compiled in from `scenarios/`.

pub const BUNDLED: &[(&str, &str)] = &[
    ("maze_ada", include_str!("../../scenarios/maze_ada.scn")),
    ("maze_ada_free", include_str!("../../scenarios/maze_ada_free.scn")),
    ("circuit_uav", include_str!("../../scenarios/circuit_uav.scn")),
    ("circuit_uav_free", include_str!("../../scenarios/circuit_uav_free.scn")),
    ("swarm_11", include_str!("../../scenarios/swarm_11.scn")),
    ("single_uav", include_str!("../../scenarios/single_uav.scn")),
    ("task_free", include_str!("../../scenarios/task_free.scn")),
    ("task_push", include_str!("../../scenarios/task_push.scn")),
    ("task_interpose", include_str!("../../scenarios/task_interpose.scn")),
    ("task_nudge", include_str!("../../scenarios/task_nudge.scn")),
    ("passivity", include_str!("../../scenarios/passivity.scn")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}
