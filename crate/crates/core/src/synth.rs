//! Seeded synthetic indoor scenes for tests, benchmarks and demos.
//!
//! Each scene is a floor slab plus a seeded selection of furniture
//! arrangements chosen to exercise every relation predicate: stacks and
//! containers, wall decor, pendant fixtures, chair rows. Instance points are
//! the 8 box corners plus seeded interior fill, so node boxes are exact.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::scene::{PointRecord, ScenePointCloud};
use crate::seed::rng_for;

/// Bounds and knobs for [`generate_scene`].
#[derive(Debug, Clone)]
pub struct SynthParams {
    pub min_objects: usize,
    pub max_objects: usize,
    /// interior points sampled per instance, in addition to the 8 corners
    pub fill_points: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams { min_objects: 4, max_objects: 12, fill_points: 24 }
    }
}

struct Placement {
    label: &'static str,
    min: [f64; 3],
    max: [f64; 3],
}

const ROOM_TYPES: [&str; 5] = ["living room", "bedroom", "office", "kitchen", "study"];

/// Generate one deterministic synthetic scene for `seed`.
///
/// The scene always passes [`crate::scene::validate_scene`] and contains a
/// floor plus `min_objects..=max_objects` other instances.
pub fn generate_scene(seed: u64, params: &SynthParams) -> ScenePointCloud {
    let scene_id = format!("synth-{seed:04}");
    let mut rng = rng_for(seed, &["synth", &scene_id]);
    let width = rng.random_range(5.0..8.0);
    let depth = rng.random_range(4.0..7.0);
    let floor_top = 0.05;

    let mut placements: Vec<Placement> = vec![Placement {
        label: "floor",
        min: [0.0, 0.0, 0.0],
        max: [width, depth, floor_top],
    }];
    let target_objects = rng.random_range(params.min_objects..=params.max_objects);
    let mut budget = target_objects;

    // Wall along y = depth; prerequisite for the hanging arrangements.
    let has_wall = budget >= 5 && rng.random_bool(0.8);
    if has_wall {
        placements.push(Placement {
            label: "wall",
            min: [0.0, depth - 0.08, floor_top],
            max: [width, depth, 2.5],
        });
        budget -= 1;
    }

    // Table with items on and above it.
    let table_min = [1.0, 1.0, floor_top];
    let table_max = [2.0, 2.0, 0.8];
    placements.push(Placement { label: "table", min: table_min, max: table_max });
    budget -= 1;
    if budget >= 1 {
        placements.push(Placement {
            label: "cup",
            min: [1.4, 1.4, 0.8],
            max: [1.6, 1.6, 0.9],
        });
        budget -= 1;
    }
    if budget >= 1 && rng.random_bool(0.7) {
        // Pendant lamp over the table: above / below.
        placements.push(Placement {
            label: "lamp",
            min: [1.3, 1.3, 1.6],
            max: [1.7, 1.7, 1.9],
        });
        budget -= 1;
    }

    // Row of chairs along X: aligned group + between for the middle one.
    if budget >= 3 {
        let row_y = depth - 1.5;
        let jitter = [0.0, 0.02, -0.02];
        for (i, dy) in jitter.iter().enumerate() {
            let x0 = 0.8 + i as f64 * 0.9;
            placements.push(Placement {
                label: "chair",
                min: [x0, row_y + dy - 0.25, floor_top],
                max: [x0 + 0.5, row_y + dy + 0.25, 0.95],
            });
        }
        budget -= 3;
    }

    // Cabinet with a book fully inside and a tall vase placed in it (the
    // vase sticks far enough out that its containment stays below the
    // embedded band).
    if budget >= 3 && rng.random_bool(0.8) {
        let cx = width - 1.4;
        placements.push(Placement {
            label: "cabinet",
            min: [cx, 0.4, floor_top],
            max: [cx + 0.9, 1.0, 1.1],
        });
        placements.push(Placement {
            label: "book",
            min: [cx + 0.1, 0.5, 0.2],
            max: [cx + 0.35, 0.7, 0.35],
        });
        placements.push(Placement {
            label: "vase",
            min: [cx + 0.5, 0.55, 0.2],
            max: [cx + 0.7, 0.75, 2.1],
        });
        budget -= 3;
    }

    // Sink embedded into a countertop: half the sink's height rises above
    // the counter top, putting its containment in the embedded band.
    if budget >= 2 && rng.random_bool(0.6) {
        let cy = depth - 2.6;
        placements.push(Placement {
            label: "countertop",
            min: [3.0, cy, floor_top],
            max: [4.6, cy + 0.7, 0.95],
        });
        placements.push(Placement {
            label: "sink",
            min: [3.4, cy + 0.1, 0.85],
            max: [4.0, cy + 0.6, 1.05],
        });
        budget -= 2;
    }

    // A pair of pots, adjacent and close: exercises the proximity grades.
    if budget >= 2 && rng.random_bool(0.7) {
        placements.push(Placement {
            label: "pot",
            min: [0.4, 0.3, floor_top],
            max: [0.7, 0.6, 0.4],
        });
        placements.push(Placement {
            label: "pot",
            min: [0.75, 0.3, floor_top],
            max: [1.05, 0.6, 0.4],
        });
        budget -= 2;
    }

    // Wall decor: tv (refined to mounted-on), poster (affixed-on),
    // painting (stays hanging-on), clock high above a stool.
    if has_wall {
        if budget >= 1 && rng.random_bool(0.8) {
            placements.push(Placement {
                label: "tv",
                min: [0.4, depth - 0.14, 1.1],
                max: [1.4, depth - 0.09, 1.7],
            });
            budget -= 1;
        }
        if budget >= 1 && rng.random_bool(0.6) {
            placements.push(Placement {
                label: "poster",
                min: [1.8, depth - 0.13, 1.3],
                max: [2.4, depth - 0.1, 1.9],
            });
            budget -= 1;
        }
        if budget >= 1 && rng.random_bool(0.6) {
            placements.push(Placement {
                label: "painting",
                min: [2.8, depth - 0.14, 1.2],
                max: [3.6, depth - 0.1, 1.8],
            });
            budget -= 1;
        }
        if budget >= 2 && rng.random_bool(0.7) {
            // Clock hangs high on the wall; the stool sits clear of it in XY,
            // within the higher-than window.
            placements.push(Placement {
                label: "clock",
                min: [width - 1.2, depth - 0.14, 2.0],
                max: [width - 0.9, depth - 0.1, 2.3],
            });
            placements.push(Placement {
                label: "stool",
                min: [width - 1.7, depth - 1.2, floor_top],
                max: [width - 1.3, depth - 0.8, 0.45],
            });
            budget -= 2;
        }
    }

    // Fill any remaining budget with plants scattered along the free strip
    // between the table zone and the chair row.
    let mut plant_slot = 0;
    while budget > 0 {
        let x = 0.3 + (plant_slot as f64 * 1.1) % (width - 0.8);
        let y = 2.15 + 0.18 * ((plant_slot % 3) as f64);
        placements.push(Placement {
            label: "plant",
            min: [x, y, floor_top],
            max: [x + 0.25, y + 0.15, 0.6 + 0.05 * plant_slot as f64],
        });
        plant_slot += 1;
        budget -= 1;
    }

    build_cloud(scene_id, placements, &mut rng, params.fill_points)
}

fn build_cloud(
    scene_id: String,
    placements: Vec<Placement>,
    rng: &mut ChaCha8Rng,
    fill_points: usize,
) -> ScenePointCloud {
    let mut labels: Vec<String> = placements.iter().map(|p| p.label.to_string()).collect();
    labels.sort();
    labels.dedup();
    let sem_of = |label: &str| labels.iter().position(|l| l == label).unwrap() as u32;

    let mut instances = BTreeMap::new();
    let mut points = Vec::new();
    for (id, placement) in placements.iter().enumerate() {
        let id = id as u32;
        instances.insert(id, placement.label.to_string());
        let sem = sem_of(placement.label);
        let color: [i32; 3] = [
            rng.random_range(0..256),
            rng.random_range(0..256),
            rng.random_range(0..256),
        ];
        let (min, max) = (placement.min, placement.max);
        for &x in &[min[0], max[0]] {
            for &y in &[min[1], max[1]] {
                for &z in &[min[2], max[2]] {
                    points.push(PointRecord {
                        x,
                        y,
                        z,
                        r: color[0],
                        g: color[1],
                        b: color[2],
                        instance_id: id,
                        semantic_id: sem,
                    });
                }
            }
        }
        for _ in 0..fill_points {
            points.push(PointRecord {
                x: rng.random_range(min[0]..=max[0]),
                y: rng.random_range(min[1]..=max[1]),
                z: rng.random_range(min[2]..=max[2]),
                r: color[0],
                g: color[1],
                b: color[2],
                instance_id: id,
                semantic_id: sem,
            });
        }
    }
    let room_type = ROOM_TYPES[rng.random_range(0..ROOM_TYPES.len())];
    ScenePointCloud {
        scene_id,
        source_dataset: "synthetic".into(),
        room_type: Some(room_type.to_string()),
        instances,
        points,
    }
}
