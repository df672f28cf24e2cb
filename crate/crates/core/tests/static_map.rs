use std::path::Path;

use nalgebra::Point2;
use socnav::costmap::{compose, load_static_map, InflationParams, LayerStack, FREE, LETHAL, UNKNOWN};
use socnav::planner::plan_path;
use socnav::social_field::SceneState;

/// 10x10 corridor: two wall rows top and bottom, one grey pixel inside.
fn write_corridor(dir: &Path, ascii: bool) -> std::path::PathBuf {
    let mut px = vec![254u8; 100];
    for row in [0, 1, 8, 9] {
        for c in 0..10 {
            px[row * 10 + c] = 0;
        }
    }
    px[5 * 10 + 3] = 205;
    let image = if ascii {
        let body: Vec<String> = px.chunks(10).map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")).collect();
        std::fs::write(dir.join("corridor.pgm"), format!("P2\n10 10\n255\n{}\n", body.join("\n"))).unwrap();
        "corridor.pgm"
    } else {
        let mut bytes = b"P5\n10 10\n255\n".to_vec();
        bytes.extend(&px);
        std::fs::write(dir.join("corridor_bin.pgm"), bytes).unwrap();
        "corridor_bin.pgm"
    };
    let yaml = dir.join(format!("{image}.yaml"));
    std::fs::write(
        &yaml,
        format!("image: {image}\nresolution: 0.1\norigin: [1.0, -0.5, 0.0]\nnegate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n"),
    )
    .unwrap();
    yaml
}

#[test]
fn corridor_golden() {
    let tmp = tempfile::tempdir().unwrap();
    for ascii in [true, false] {
        let map = load_static_map(&write_corridor(tmp.path(), ascii)).unwrap().costmap;
        let spec = *map.spec();
        assert_eq!((spec.width, spec.height, spec.origin_x, spec.origin_y), (10, 10, 1.0, -0.5));
        // image rows run top-down, grid rows bottom-up
        for j in [0, 1, 8, 9] {
            assert!((0..10).all(|i| map.get(i, j) == LETHAL));
        }
        assert_eq!(map.get(3, 4), UNKNOWN);
        assert_eq!(map.count(FREE), 59);

        let stack = LayerStack::new(spec)
            .with_static(map)
            .with_inflation(InflationParams {
                inscribed_radius: 0.15,
                decay_rate: 3.0,
            });
        let master = compose(&stack, &SceneState::default());
        // 252·e^(-3·0.05) = 216.9, 252·e^(-3·0.15) = 160.7
        let column: Vec<u8> = (0..10).map(|j| master.get(0, j)).collect();
        assert_eq!(column, [254, 254, 253, 217, 161, 161, 217, 253, 254, 254]);
        assert_eq!(master.get(3, 4), UNKNOWN);

        let path = plan_path(&master, Point2::new(1.05, 0.0), Point2::new(1.95, 0.0), 0.02).unwrap();
        assert!(path.iter().all(|p| p.y > -0.15 && p.y < 0.15), "{path:?}");
    }
}

#[test]
fn bundled_lab_map() {
    let yaml = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/maps/lab.yaml");
    let m = load_static_map(&yaml).unwrap();
    let spec = m.costmap.spec();
    assert_eq!((spec.width, spec.height), (200, 140));
    assert_eq!(m.costmap.cost_at(Point2::new(0.0, 0.0)), Some(FREE));
    assert_eq!(m.costmap.cost_at(Point2::new(-0.97, 0.0)), Some(LETHAL));
    assert_eq!(m.costmap.cost_at(Point2::new(4.0, 3.45)), Some(LETHAL));
}

#[test]
fn missing_image_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let yaml = tmp.path().join("m.yaml");
    std::fs::write(&yaml, "image: nope.pgm\nresolution: 0.05\n").unwrap();
    let err = load_static_map(&yaml).unwrap_err().to_string();
    assert!(err.contains("nope.pgm"), "{err}");
}
