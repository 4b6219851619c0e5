use mvsk::canonical_direction;
use mvsk::fusion::carve_occupancy;
use mvsk::geom::{normalize_mesh, FrameMode, RigSize, ViewRig};
use mvsk::metrics::voxel_iou;
use mvsk::render::render_multisurface;
use mvsk::shapes::{Category, ShapeSpec};
use mvsk::voxel::{voxelize_solid, GridSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn probe_all_categories_carve() {
    let rig = ViewRig::build(canonical_direction(), RigSize::Twenty, FrameMode::Object);
    for category in Category::ALL {
        for seed in [101u64, 201, 301, 401, 501, 601] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = ShapeSpec::sample(category, &mut rng);
            let mesh = normalize_mesh(&spec.mesh()).unwrap().0;
            let ms = render_multisurface(&mesh, &rig, 128);
            let carved = carve_occupancy(&ms, 48).unwrap();
            let solid = voxelize_solid(&mesh, &GridSpec::object(48)).unwrap();
            let iou = voxel_iou(&carved, &solid).unwrap();
            let mut carve_only = 0usize;
            let mut gt_only = 0usize;
            for z in 0..48 { for y in 0..48 { for x in 0..48 {
                match (carved.get(x,y,z), solid.get(x,y,z)) {
                    (true, false) => carve_only += 1,
                    (false, true) => gt_only += 1,
                    _ => {}
                }
            }}}
            println!("{} seed {seed}: iou {iou:.4} carve_only {carve_only} gt_only {gt_only}", category.name());
        }
    }
}
