use nalgebra::DMatrix;
use proptest::prelude::*;

use netcov::io::{decode_matrix, encode_matrix, parse_grid, read_network, write_grid, write_network, GridNode, VelocityGrid};
use netcov::network::{build_network, EdgeMetric};

/// Full lattice with random velocities, values and land mask, always keeping
/// node (0, 0) as water.
fn grid_strategy() -> impl Strategy<Value = VelocityGrid> {
    (2usize..6, 1usize..5, 1.0f64..50.0, 1.0f64..50.0).prop_flat_map(|(nx, ny, sx, sy)| {
        let cells = prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, prop::option::of(-5.0f64..5.0), any::<bool>()), nx * ny);
        cells.prop_map(move |cells| {
            let nodes = cells
                .into_iter()
                .enumerate()
                .map(|(k, (u, v, value, wet))| {
                    let (ix, iy) = (k % nx, k / nx);
                    let is_water = k == 0 || wet || value.is_some();
                    GridNode {
                        ix,
                        iy,
                        x: ix as f64 * sx,
                        y: iy as f64 * sy,
                        u,
                        v,
                        value: if is_water { value } else { None },
                        is_water,
                    }
                })
                .collect();
            VelocityGrid::with_spacing(nodes, sx, sy).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn grid_csv_roundtrip(grid in grid_strategy()) {
        let back = parse_grid(&write_grid(&grid)).unwrap();
        prop_assert_eq!(back.nodes.len(), grid.nodes.len());
        for (a, b) in grid.nodes.iter().zip(&back.nodes) {
            prop_assert_eq!((a.ix, a.iy, a.is_water, a.value), (b.ix, b.iy, b.is_water, b.value));
            if a.is_water {
                prop_assert_eq!((a.u, a.v), (b.u, b.v));
            }
        }
        prop_assert!((back.spacing_x - grid.spacing_x).abs() < 1e-9 * grid.spacing_x);
        // A single row carries no y spacing; the parser reuses the x spacing.
        let expected_y = if grid.ny > 1 { grid.spacing_y } else { grid.spacing_x };
        prop_assert!((back.spacing_y - expected_y).abs() < 1e-9 * expected_y);
    }

    #[test]
    fn network_json_roundtrip(grid in grid_strategy()) {
        if let Ok(net) = build_network(&grid, EdgeMetric::Euclidean) {
            let back = read_network(&write_network(&net)).unwrap();
            prop_assert_eq!(back.edges(), net.edges());
            prop_assert_eq!(back.vertices(), net.vertices());
            for a in 0..net.len() {
                prop_assert!((back.sink_mass(a) - net.sink_mass(a)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matrix_roundtrip_is_bit_exact(rows in 0usize..6, cols in 0usize..6, seed in any::<u64>()) {
        let m = DMatrix::from_fn(rows, cols, |i, j| f64::from_bits(seed.rotate_left((i * 7 + j) as u32) & 0x7fef_ffff_ffff_ffff));
        let (bytes, desc) = encode_matrix(&m, Default::default());
        let back = decode_matrix(&bytes, &desc).unwrap();
        prop_assert_eq!((back.nrows(), back.ncols()), (rows, cols));
        prop_assert!(m.iter().zip(back.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
