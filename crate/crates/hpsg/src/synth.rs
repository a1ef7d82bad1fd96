//! Synthetic scene generator: emits multi-view manifests, binary grids,
//! caption files and ground truth for testing and benchmarking.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use crate::ingest::MANIFEST_VERSION;
use crate::label::StructuralLabel;
use crate::plane::PlaneParams;

pub const GROUND_TRUTH_VERSION: u32 = 1;
pub const CAPTIONS_VERSION: u32 = 1;

/// Axis-aligned rectangular surface patch making up the room shell.
#[derive(Debug, Clone)]
pub struct SurfaceSpec {
    pub label: StructuralLabel,
    /// Axis the surface is flat in (0=x, 1=y, 2=z).
    pub fixed_axis: usize,
    pub fixed_val: f64,
    /// Extents along the two remaining axes, in ascending axis order.
    pub span: [(f64, f64); 2],
}

impl SurfaceSpec {
    fn span_axes(&self) -> (usize, usize) {
        match self.fixed_axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    fn normal(&self) -> Vec3 {
        let mut n = [0.0; 3];
        n[self.fixed_axis] = 1.0;
        n
    }

    fn plane(&self) -> PlaneParams {
        PlaneParams {
            normal: self.normal(),
            offset_d: self.fixed_val,
        }
        .canonicalize()
    }
}

/// Box-shaped object; points are sampled on the top face and a skirt band
/// around the upper sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub instance_id: u32,
    pub tag: String,
    pub captions: Vec<String>,
    pub center_xy: [f64; 2],
    pub half_xy: [f64; 2],
    pub base_z: f64,
    pub height: f64,
}

impl ObjectSpec {
    pub fn top_z(&self) -> f64 {
        self.base_z + self.height
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.center_xy[0] - self.half_xy[0], self.center_xy[0] + self.half_xy[0])
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.center_xy[1] - self.half_xy[1], self.center_xy[1] + self.half_xy[1])
    }

    fn skirt(&self) -> f64 {
        0.12f64.min(self.height)
    }

    /// Region the sampler draws from: top face plus the upper side band.
    pub fn sample_box(&self) -> Aabb {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        Aabb {
            min: [x0, y0, self.top_z() - self.skirt()],
            max: [x1, y1, self.top_z()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub name: String,
    pub dims: [f64; 3],
    pub n_views: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    /// Rotation of the whole scene about the y axis, degrees.
    pub rot_deg: f64,
    /// Fraction of surface pixels replaced with low-confidence garbage.
    pub dropout: f64,
    /// Samples per square meter on structural surfaces.
    pub structural_density: f64,
    /// Samples per square meter on object surfaces (min 40 per object).
    pub object_density: f64,
    pub surfaces: Vec<SurfaceSpec>,
    pub objects: Vec<ObjectSpec>,
    /// (a_instance, b_instance, relation) triples of designed relations.
    pub relations: Vec<(u32, u32, String)>,
    pub scene_type: String,
}

fn shell_surfaces(dims: [f64; 3], floor: bool, ceiling: bool) -> Vec<SurfaceSpec> {
    let [l, w, h] = dims;
    let mut out = Vec::new();
    if floor {
        out.push(SurfaceSpec {
            label: StructuralLabel::Floor,
            fixed_axis: 2,
            fixed_val: 0.0,
            span: [(0.0, l), (0.0, w)],
        });
    }
    if ceiling {
        out.push(SurfaceSpec {
            label: StructuralLabel::Ceiling,
            fixed_axis: 2,
            fixed_val: h,
            span: [(0.0, l), (0.0, w)],
        });
    }
    for x in [0.0, l] {
        out.push(SurfaceSpec {
            label: StructuralLabel::Wall,
            fixed_axis: 0,
            fixed_val: x,
            span: [(0.0, w), (0.0, h)],
        });
    }
    for y in [0.0, w] {
        out.push(SurfaceSpec {
            label: StructuralLabel::Wall,
            fixed_axis: 1,
            fixed_val: y,
            span: [(0.0, l), (0.0, h)],
        });
    }
    out
}

impl SceneSpec {
    pub fn room(seed: u64) -> SceneSpec {
        let dims = [4.0, 3.0, 2.5];
        let obj = |id: u32, tag: &str, captions: &[&str], cx: f64, cy: f64, hx: f64, hy: f64, base: f64, h: f64| ObjectSpec {
            instance_id: id,
            tag: tag.to_string(),
            captions: captions.iter().map(|s| s.to_string()).collect(),
            center_xy: [cx, cy],
            half_xy: [hx, hy],
            base_z: base,
            height: h,
        };
        SceneSpec {
            name: "room".to_string(),
            dims,
            n_views: 8,
            width: 100,
            height: 96,
            seed,
            noise_sigma: 0.005,
            rot_deg: 0.0,
            dropout: 0.05,
            structural_density: 200.0,
            object_density: 900.0,
            surfaces: shell_surfaces(dims, true, true),
            objects: vec![
                obj(10, "table", &["a wooden table", "a table"], 1.4, 1.3, 0.4, 0.3, 0.0, 0.75),
                obj(11, "cup", &["a ceramic cup"], 1.4, 1.3, 0.05, 0.05, 0.75, 0.1),
                obj(12, "chair", &["a chair"], 2.2, 1.2, 0.25, 0.25, 0.0, 0.9),
                obj(13, "bed", &["a bed", "a single bed"], 0.9, 2.4, 0.7, 0.4, 0.0, 0.5),
                obj(14, "lamp", &["a floor lamp"], 3.6, 0.4, 0.15, 0.15, 0.0, 1.5),
            ],
            relations: vec![(11, 10, "on".to_string())],
            scene_type: "room".to_string(),
        }
    }

    pub fn tilted_room(seed: u64, rot_deg: f64) -> SceneSpec {
        let mut spec = SceneSpec::room(seed);
        spec.name = format!("tilted_room_{rot_deg}");
        spec.rot_deg = rot_deg;
        spec
    }

    pub fn office(seed: u64) -> SceneSpec {
        let dims = [8.0, 6.0, 3.0];
        let mut objects = Vec::new();
        let mut relations = Vec::new();
        let mut id = 100u32;
        let mut push = |objects: &mut Vec<ObjectSpec>, tag: &str, caption: &str, cx: f64, cy: f64, hx: f64, hy: f64, base: f64, h: f64| -> u32 {
            let this = id;
            objects.push(ObjectSpec {
                instance_id: this,
                tag: tag.to_string(),
                captions: vec![caption.to_string()],
                center_xy: [cx, cy],
                half_xy: [hx, hy],
                base_z: base,
                height: h,
            });
            id += 1;
            this
        };
        for row in 0..5 {
            for col in 0..6 {
                let cx = 0.8 + col as f64 * 1.2;
                let cy = 0.7 + row as f64 * 1.1;
                let desk = push(&mut objects, "desk", "a desk", cx, cy, 0.35, 0.25, 0.0, 0.72);
                let monitor = push(&mut objects, "monitor", "a monitor", cx - 0.15, cy, 0.08, 0.04, 0.72, 0.4);
                let keyboard = push(&mut objects, "keyboard", "a keyboard", cx + 0.15, cy, 0.12, 0.06, 0.72, 0.04);
                relations.push((monitor, desk, "on".to_string()));
                relations.push((keyboard, desk, "on".to_string()));
            }
        }
        for row in 0..2 {
            for col in 0..6 {
                let cx = 0.8 + col as f64 * 1.2;
                let cy = 0.7 + row as f64 * 1.1 - 0.45;
                push(&mut objects, "chair", "an office chair", cx, cy, 0.2, 0.15, 0.0, 0.85);
            }
        }
        let table_captions = [
            "a round table",
            "a long table",
            "a side table",
            "a wooden table",
            "a small table",
        ];
        let mut first_table = 0;
        for (i, caption) in table_captions.iter().enumerate() {
            let t = push(&mut objects, "table", caption, 1.0 + i as f64 * 1.4, 5.6, 0.3, 0.2, 0.0, 0.74);
            if i == 0 {
                first_table = t;
            }
        }
        let cup = push(&mut objects, "cup", "a ceramic cup", 1.0, 5.6, 0.05, 0.05, 0.74, 0.1);
        relations.push((cup, first_table, "on".to_string()));
        push(&mut objects, "whiteboard", "a whiteboard", 7.7, 3.0, 0.06, 0.6, 1.0, 1.2);
        push(&mut objects, "plant", "a potted plant", 7.6, 5.5, 0.15, 0.15, 0.0, 1.1);
        push(&mut objects, "bin", "a trash bin", 7.6, 0.4, 0.15, 0.15, 0.0, 0.4);
        push(&mut objects, "bookshelf", "a bookshelf", 7.6, 4.3, 0.2, 0.35, 0.0, 1.8);
        SceneSpec {
            name: "office".to_string(),
            dims,
            n_views: 10,
            width: 176,
            height: 120,
            seed,
            noise_sigma: 0.005,
            rot_deg: 0.0,
            dropout: 0.05,
            structural_density: 150.0,
            object_density: 800.0,
            surfaces: shell_surfaces(dims, true, true),
            objects,
            relations,
            scene_type: "office".to_string(),
        }
    }

    /// Two adjoining wall shells with no floor or ceiling: gravity cannot be
    /// bootstrapped from this scene.
    pub fn two_rooms(seed: u64) -> SceneSpec {
        let dims = [6.0, 3.0, 2.5];
        let mut surfaces = shell_surfaces(dims, false, false);
        surfaces.push(SurfaceSpec {
            label: StructuralLabel::Wall,
            fixed_axis: 0,
            fixed_val: 3.0,
            span: [(0.0, 3.0), (0.0, 2.5)],
        });
        SceneSpec {
            name: "two_rooms".to_string(),
            dims,
            n_views: 6,
            width: 96,
            height: 80,
            seed,
            noise_sigma: 0.005,
            rot_deg: 0.0,
            dropout: 0.05,
            structural_density: 200.0,
            object_density: 900.0,
            surfaces,
            objects: Vec::new(),
            relations: Vec::new(),
            scene_type: "room".to_string(),
        }
    }

    pub fn preset(name: &str, seed: u64, rot_deg: f64) -> Result<SceneSpec> {
        match name {
            "room" => Ok(SceneSpec::room(seed)),
            "office" => Ok(SceneSpec::office(seed)),
            "tilted-room" => Ok(SceneSpec::tilted_room(seed, rot_deg)),
            "two-rooms" => Ok(SceneSpec::two_rooms(seed)),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (expected room, office, tilted-room, two-rooms)"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// ground truth

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtPlane {
    pub normal: Vec3,
    pub offset_d: f64,
    pub label: StructuralLabel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtObject {
    pub instance_id: u32,
    pub tag: String,
    pub caption: String,
    pub bbox: Aabb,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtRelation {
    pub a_instance: u32,
    pub b_instance: u32,
    pub relation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub version: u32,
    pub scene_type: String,
    pub up: Vec3,
    pub planes: Vec<GtPlane>,
    pub objects: Vec<GtObject>,
    pub relations: Vec<GtRelation>,
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// generation

fn rot_y(p: Vec3, deg: f64) -> Vec3 {
    let (s, c) = deg.to_radians().sin_cos();
    [p[0] * c + p[2] * s, p[1], -p[0] * s + p[2] * c]
}

fn rotated_plane(params: &PlaneParams, deg: f64) -> PlaneParams {
    PlaneParams {
        normal: rot_y(params.normal, deg),
        offset_d: params.offset_d,
    }
    .canonicalize()
}

fn rotated_box(b: &Aabb, deg: f64) -> Aabb {
    let mut out: Option<Aabb> = None;
    for &x in &[b.min[0], b.max[0]] {
        for &y in &[b.min[1], b.max[1]] {
            for &z in &[b.min[2], b.max[2]] {
                let p = rot_y([x, y, z], deg);
                out = Some(match out {
                    None => Aabb { min: p, max: p },
                    Some(mut a) => {
                        a.expand_point(p);
                        a
                    }
                });
            }
        }
    }
    out.unwrap()
}

fn check_placements(spec: &SceneSpec) -> Result<()> {
    let [l, w, h] = spec.dims;
    let margin = 0.05;
    for o in &spec.objects {
        let (x0, x1) = o.x_range();
        let (y0, y1) = o.y_range();
        if x0 < margin || x1 > l - margin || y0 < margin || y1 > w - margin {
            return Err(Error::InfeasiblePlacement(format!(
                "object {} ({}) leaves the room footprint",
                o.instance_id, o.tag
            )));
        }
        if o.base_z < -1e-9 || o.top_z() > h - margin {
            return Err(Error::InfeasiblePlacement(format!(
                "object {} ({}) exceeds the room height",
                o.instance_id, o.tag
            )));
        }
    }
    for (i, a) in spec.objects.iter().enumerate() {
        for b in spec.objects.iter().skip(i + 1) {
            let (ax0, ax1) = a.x_range();
            let (bx0, bx1) = b.x_range();
            let (ay0, ay1) = a.y_range();
            let (by0, by1) = b.y_range();
            let xy_overlap = ax0 < bx1 && bx0 < ax1 && ay0 < by1 && by0 < ay1;
            let z_disjoint = a.top_z() <= b.base_z + 1e-9 || b.top_z() <= a.base_z + 1e-9;
            if xy_overlap && !z_disjoint {
                return Err(Error::InfeasiblePlacement(format!(
                    "objects {} and {} intersect",
                    a.instance_id, b.instance_id
                )));
            }
        }
    }
    Ok(())
}

/// Per-view x-slab; slabs overlap so that interior structure is visible from
/// several neighboring views.
fn slab(spec: &SceneSpec, view: usize) -> (f64, f64) {
    let base = spec.dims[0] / spec.n_views as f64;
    (view as f64 * base - base, (view + 1) as f64 * base + base)
}

struct ViewSamples {
    /// (clean point, owner) where owner indexes surfaces then objects.
    samples: Vec<(Vec3, usize)>,
}

fn sample_view(spec: &SceneSpec, view: usize, rng: &mut ChaCha8Rng) -> ViewSamples {
    let (sx0, sx1) = slab(spec, view);
    let mut samples = Vec::new();
    for (si, s) in spec.surfaces.iter().enumerate() {
        let (a_axis, b_axis) = s.span_axes();
        let mut a_range = s.span[0];
        let mut b_range = s.span[1];
        // clip the x extent by the view slab; x is either the fixed axis or
        // one of the span axes
        if s.fixed_axis == 0 {
            if s.fixed_val < sx0 - 1e-9 || s.fixed_val > sx1 + 1e-9 {
                continue;
            }
        } else if a_axis == 0 {
            a_range = (a_range.0.max(sx0), a_range.1.min(sx1));
        } else if b_axis == 0 {
            b_range = (b_range.0.max(sx0), b_range.1.min(sx1));
        }
        let ea = a_range.1 - a_range.0;
        let eb = b_range.1 - b_range.0;
        if ea <= 0.0 || eb <= 0.0 {
            continue;
        }
        let n = (ea * eb * spec.structural_density).round() as usize;
        for _ in 0..n {
            let mut p = [0.0; 3];
            p[s.fixed_axis] = s.fixed_val;
            p[a_axis] = rng.gen_range(a_range.0..a_range.1);
            p[b_axis] = rng.gen_range(b_range.0..b_range.1);
            samples.push((p, si));
        }
    }
    let nsurf = spec.surfaces.len();
    for (oi, o) in spec.objects.iter().enumerate() {
        let sb = o.sample_box();
        let (x0, x1) = (sb.min[0], sb.max[0]);
        if x1 < sx0 || x0 > sx1 {
            continue;
        }
        let (y0, y1) = (sb.min[1], sb.max[1]);
        let skirt = o.skirt();
        let top_area = (x1 - x0) * (y1 - y0);
        let side_area = 2.0 * ((x1 - x0) + (y1 - y0)) * skirt;
        let total_area = top_area + side_area;
        let n = ((total_area * spec.object_density).ceil() as usize).max(40);
        for _ in 0..n {
            // pick top face vs skirt band by area, then reject outside the slab
            let p = if rng.gen_range(0.0..total_area) < top_area {
                [rng.gen_range(x0..x1), rng.gen_range(y0..y1), o.top_z()]
            } else {
                let z = rng.gen_range(o.top_z() - skirt..o.top_z());
                let u = rng.gen_range(0.0..2.0 * ((x1 - x0) + (y1 - y0)));
                if u < x1 - x0 {
                    [x0 + u, y0, z]
                } else if u < 2.0 * (x1 - x0) {
                    [x0 + (u - (x1 - x0)), y1, z]
                } else if u < 2.0 * (x1 - x0) + (y1 - y0) {
                    [x0, y0 + (u - 2.0 * (x1 - x0)), z]
                } else {
                    [x1, y0 + (u - 2.0 * (x1 - x0) - (y1 - y0)), z]
                }
            };
            if p[0] >= sx0 && p[0] <= sx1 {
                samples.push((p, nsurf + oi));
            }
        }
    }
    ViewSamples { samples }
}

fn write_f32(path: &Path, values: &[f32]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Generate a synthetic scene into `out_dir`: `scene.json` plus binary grids,
/// `captions.json` and `ground_truth.json`. Returns the ground truth.
pub fn generate(spec: &SceneSpec, out_dir: &Path) -> Result<GroundTruth> {
    check_placements(spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let npix = spec.width * spec.height;
    let nsurf = spec.surfaces.len();
    let normal = Normal::new(0.0, spec.noise_sigma).expect("valid sigma");
    let mut manifest_views = Vec::new();

    for view in 0..spec.n_views {
        let mut rng = ChaCha8Rng::seed_from_u64(
            spec.seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(view as u64),
        );
        let ViewSamples { samples } = sample_view(spec, view, &mut rng);
        if samples.len() > npix {
            return Err(Error::InvalidConfig(format!(
                "view {view}: {} samples exceed the {}x{} grid",
                samples.len(),
                spec.width,
                spec.height
            )));
        }
        let mut points = vec![0.0f32; npix * 3];
        let mut conf = vec![0.0f32; npix];
        let mut owners: Vec<Option<usize>> = vec![None; npix];
        let garbage = |rng: &mut ChaCha8Rng| -> Vec3 {
            [
                rng.gen_range(-1.0..spec.dims[0] + 1.0),
                rng.gen_range(-1.0..spec.dims[1] + 1.0),
                rng.gen_range(-1.0..spec.dims[2] + 1.0),
            ]
        };
        for (pix, (clean, owner)) in samples.iter().enumerate() {
            let dropped = rng.gen_range(0.0..1.0) < spec.dropout;
            let p = if dropped {
                rot_y(garbage(&mut rng), spec.rot_deg)
            } else {
                let noisy = [
                    clean[0] + normal.sample(&mut rng),
                    clean[1] + normal.sample(&mut rng),
                    clean[2] + normal.sample(&mut rng),
                ];
                rot_y(noisy, spec.rot_deg)
            };
            points[pix * 3] = p[0] as f32;
            points[pix * 3 + 1] = p[1] as f32;
            points[pix * 3 + 2] = p[2] as f32;
            conf[pix] = if dropped {
                rng.gen_range(0.0..1.0) as f32
            } else {
                (4.0 + rng.gen_range(0.0..4.0)) as f32
            };
            owners[pix] = Some(*owner);
        }
        for pix in samples.len()..npix {
            let p = rot_y(garbage(&mut rng), spec.rot_deg);
            points[pix * 3] = p[0] as f32;
            points[pix * 3 + 1] = p[1] as f32;
            points[pix * 3 + 2] = p[2] as f32;
            conf[pix] = 0.1;
        }

        let points_file = format!("view_{view:03}_points.f32");
        let conf_file = format!("view_{view:03}_conf.f32");
        write_f32(&out_dir.join(&points_file), &points)?;
        write_f32(&out_dir.join(&conf_file), &conf)?;

        let mut masks = Vec::new();
        for owner in 0..nsurf + spec.objects.len() {
            let bits: Vec<u8> = owners
                .iter()
                .map(|&o| if o == Some(owner) { 1u8 } else { 0u8 })
                .collect();
            if !bits.iter().any(|&b| b != 0) {
                continue;
            }
            let mask_file = format!("view_{view:03}_mask_{owner:03}.u8");
            std::fs::write(out_dir.join(&mask_file), &bits)
                .map_err(|e| Error::io(mask_file.clone(), e))?;
            let (instance_id, hint) = if owner < nsurf {
                (1000 + owner as u32, None)
            } else {
                let o = &spec.objects[owner - nsurf];
                (o.instance_id, Some(o.tag.clone()))
            };
            masks.push(serde_json::json!({
                "instance_id": instance_id,
                "mask": mask_file,
                "category_hint": hint,
                "confidence": 0.7 + rng.gen_range(0.0..0.29),
            }));
        }
        let mut view_json = serde_json::json!({
            "view_id": view as u32,
            "width": spec.width,
            "height": spec.height,
            "point_map": points_file,
            "confidence_map": conf_file,
            "masks": masks,
        });
        // category_hint: null entries are accepted but omitted for tidiness
        if let Some(masks) = view_json["masks"].as_array_mut() {
            for m in masks {
                if m["category_hint"].is_null() {
                    m.as_object_mut().unwrap().remove("category_hint");
                }
            }
        }
        manifest_views.push(view_json);
    }

    let manifest = serde_json::json!({
        "version": MANIFEST_VERSION,
        "views": manifest_views,
    });
    std::fs::write(
        out_dir.join("scene.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )
    .map_err(|e| Error::io("scene.json".to_string(), e))?;

    let mut captions: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for o in &spec.objects {
        captions.insert(o.instance_id.to_string(), o.captions.clone());
    }
    let captions_json = serde_json::json!({
        "version": CAPTIONS_VERSION,
        "instances": captions,
    });
    std::fs::write(
        out_dir.join("captions.json"),
        serde_json::to_string_pretty(&captions_json).expect("captions serialize") + "\n",
    )
    .map_err(|e| Error::io("captions.json".to_string(), e))?;

    let gt = GroundTruth {
        version: GROUND_TRUTH_VERSION,
        scene_type: spec.scene_type.clone(),
        up: rot_y([0.0, 0.0, 1.0], spec.rot_deg),
        planes: spec
            .surfaces
            .iter()
            .map(|s| {
                let p = rotated_plane(&s.plane(), spec.rot_deg);
                GtPlane {
                    normal: p.normal,
                    offset_d: p.offset_d,
                    label: s.label,
                }
            })
            .collect(),
        objects: spec
            .objects
            .iter()
            .map(|o| GtObject {
                instance_id: o.instance_id,
                tag: o.tag.clone(),
                caption: o.captions.first().cloned().unwrap_or_default(),
                bbox: rotated_box(&o.sample_box(), spec.rot_deg),
            })
            .collect(),
        relations: spec
            .relations
            .iter()
            .map(|(a, b, r)| GtRelation {
                a_instance: *a,
                b_instance: *b,
                relation: r.clone(),
            })
            .collect(),
    };
    std::fs::write(
        out_dir.join("ground_truth.json"),
        serde_json::to_string_pretty(&gt).expect("ground truth serializes") + "\n",
    )
    .map_err(|e| Error::io("ground_truth.json".to_string(), e))?;
    Ok(gt)
}
