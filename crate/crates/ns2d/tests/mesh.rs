//! Mesh construction, generators, refinement, normals and the text format.

use proptest::prelude::*;

use ns2d::mesh::{
    channel_tags, format_mesh, gen_cylinder_channel, gen_stretched_square, gen_unit_square,
    parse_mesh, BoundaryEdge, Mesh,
};
use ns2d::Error;

fn total_area(mesh: &Mesh) -> f64 {
    (0..mesh.triangle_count()).map(|t| mesh.signed_area(t)).sum()
}

#[test]
fn unit_square_counts() {
    let mesh = gen_unit_square(1).unwrap();
    assert_eq!(mesh.vertex_count(), 4);
    assert_eq!(mesh.triangle_count(), 2);
    assert_eq!(mesh.boundary_edges().len(), 4);

    let mesh = gen_unit_square(10).unwrap();
    assert_eq!(mesh.vertex_count(), 121);
    assert_eq!(mesh.triangle_count(), 200);
    assert_eq!(mesh.boundary_edges().len(), 40);
    assert_eq!(mesh.edge_count(), 320);
    assert_eq!(mesh.euler_characteristic(), 1);
}

#[test]
fn unit_square_geometry() {
    let mesh = gen_unit_square(10).unwrap();
    assert!((total_area(&mesh) - 1.0).abs() < 1e-14);
    assert!((mesh.min_edge_length() - 0.1).abs() < 1e-14);
    assert!((mesh.max_edge_length() - 0.1 * 2.0f64.sqrt()).abs() < 1e-14);
}

#[test]
fn unit_square_boundary_tags() {
    let mesh = gen_unit_square(4).unwrap();
    for be in mesh.boundary_edges() {
        let [a, b] = be.vertices;
        let pa = mesh.vertices()[a];
        let pb = mesh.vertices()[b];
        match be.tag {
            1 => assert!(pa[1] == 0.0 && pb[1] == 0.0),
            2 => assert!(pa[0] == 1.0 && pb[0] == 1.0),
            3 => assert!(pa[1] == 1.0 && pb[1] == 1.0),
            4 => assert!(pa[0] == 0.0 && pb[0] == 0.0),
            t => panic!("unexpected tag {t}"),
        }
    }
}

#[test]
fn stretched_square_zero_beta_matches_uniform() {
    let a = gen_unit_square(7).unwrap();
    let b = gen_stretched_square(7, 0.0).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stretched_square_clusters_towards_boundary() {
    let mesh = gen_stretched_square(64, 0.2604).unwrap();
    // Lattice spacing near the wall versus the uniform 1/64.
    assert!((mesh.min_edge_length() - 0.011562782813336).abs() < 1e-12);
    assert!((total_area(&mesh) - 1.0).abs() < 1e-12);
    assert_eq!(mesh.vertex_count(), 65 * 65);
}

#[test]
fn stretched_square_rejects_bad_arguments() {
    assert!(matches!(
        gen_stretched_square(0, 0.0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        gen_stretched_square(4, 1.0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        gen_stretched_square(4, -0.1),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn refine_uniform_counts_compose() {
    let base = gen_unit_square(3).unwrap();
    let ab = base.refine_uniform(2).unwrap().refine_uniform(3).unwrap();
    let once = base.refine_uniform(6).unwrap();
    assert_eq!(ab.vertex_count(), once.vertex_count());
    assert_eq!(ab.triangle_count(), once.triangle_count());
    assert_eq!(ab.boundary_edges().len(), once.boundary_edges().len());
    // A refined m-square is an (m*n)-square.
    let direct = gen_unit_square(18).unwrap();
    assert_eq!(once.vertex_count(), direct.vertex_count());
    assert_eq!(once.triangle_count(), direct.triangle_count());
}

#[test]
fn refine_uniform_preserves_area_and_tags() {
    let base = gen_unit_square(4).unwrap();
    let fine = base.refine_uniform(3).unwrap();
    fine.validate().unwrap();
    assert!((total_area(&fine) - 1.0).abs() < 1e-13);
    for tag in 1..=4u32 {
        let coarse = base.boundary_edges().iter().filter(|b| b.tag == tag).count();
        let refined = fine.boundary_edges().iter().filter(|b| b.tag == tag).count();
        assert_eq!(refined, 3 * coarse);
    }
    assert!(matches!(
        base.refine_uniform(0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn node_normals_on_unit_square() {
    let mesh = gen_unit_square(4).unwrap().with_node_normals().unwrap();
    let r = 0.5f64.sqrt();
    let get = |x: f64, y: f64| -> [f64; 2] {
        let v = mesh
            .vertices()
            .iter()
            .position(|p| (p[0] - x).abs() < 1e-12 && (p[1] - y).abs() < 1e-12)
            .unwrap();
        mesh.node_normals()[&v]
    };
    let corner = get(0.0, 0.0);
    assert!((corner[0] + r).abs() < 1e-14 && (corner[1] + r).abs() < 1e-14);
    let bottom = get(0.5, 0.0);
    assert!((bottom[0]).abs() < 1e-14 && (bottom[1] + 1.0).abs() < 1e-14);
    let right = get(1.0, 0.5);
    assert!((right[0] - 1.0).abs() < 1e-14 && (right[1]).abs() < 1e-14);
    // Every boundary vertex has a unit normal.
    assert_eq!(mesh.node_normals().len(), 16);
    for n in mesh.node_normals().values() {
        assert!((n[0] * n[0] + n[1] * n[1] - 1.0).abs() < 1e-14);
    }
}

#[test]
fn boundary_edge_normals_point_outward() {
    let mesh = gen_unit_square(3).unwrap();
    let owners = mesh.boundary_edge_elements().unwrap();
    for (e, be) in mesh.boundary_edges().iter().enumerate() {
        let n = mesh.boundary_edge_normal(e, owners[e]);
        let [a, b] = be.vertices;
        let pa = mesh.vertices()[a];
        let pb = mesh.vertices()[b];
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        // Moving outward along the normal leaves the unit square.
        let out = [mid[0] + 1e-3 * n[0], mid[1] + 1e-3 * n[1]];
        assert!(
            out[0] < 0.0 || out[0] > 1.0 || out[1] < 0.0 || out[1] > 1.0,
            "normal {n:?} at edge {e} points inward"
        );
    }
}

#[test]
fn format_round_trip() {
    let mesh = gen_stretched_square(5, 0.3).unwrap();
    let text = format_mesh(&mesh);
    let back = parse_mesh(&text).unwrap();
    assert_eq!(mesh, back);
}

#[test]
fn parse_rejects_malformed_input() {
    let bad_header = "mesh 3d tet\nvertices 0\ntriangles 0\nboundary_edges 0\n";
    assert!(matches!(parse_mesh(bad_header), Err(Error::Parse { .. })));

    let bad_vertex = "mesh 2d triangle\nvertices 1\n0.0\ntriangles 0\nboundary_edges 0\n";
    assert!(matches!(parse_mesh(bad_vertex), Err(Error::Parse { .. })));

    let truncated = "mesh 2d triangle\nvertices 3\n0 0\n1 0\n";
    assert!(matches!(parse_mesh(truncated), Err(Error::Parse { .. })));
}

#[test]
fn parse_ignores_comments_and_blank_lines() {
    let text = "# a comment\nmesh 2d triangle\n\nvertices 3\n0 0\n1 0 # trailing\n0 1\n\
                triangles 1\n0 1 2\nboundary_edges 3\n0 1 1\n1 2 1\n2 0 1\n";
    let mesh = parse_mesh(text).unwrap();
    assert_eq!(mesh.vertex_count(), 3);
    assert_eq!(mesh.triangle_count(), 1);
}

#[test]
fn validate_rejects_structural_defects() {
    // Vertex index out of range.
    let r = Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 5]],
        vec![],
    );
    assert!(matches!(r, Err(Error::MalformedMesh(_))));

    // Clockwise (negative-area) triangle.
    let r = Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 2, 1]],
        vec![],
    );
    assert!(matches!(r, Err(Error::MalformedMesh(_))));

    // Boundary edge that is not a triangle edge.
    let r = Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        vec![[0, 1, 2]],
        vec![
            BoundaryEdge { vertices: [0, 1], tag: 1 },
            BoundaryEdge { vertices: [1, 2], tag: 1 },
            BoundaryEdge { vertices: [2, 0], tag: 1 },
            BoundaryEdge { vertices: [1, 3], tag: 1 },
        ],
    );
    assert!(matches!(r, Err(Error::MalformedMesh(_))));

    // Undeclared boundary edge (open hull).
    let r = Mesh::new(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
        vec![
            BoundaryEdge { vertices: [0, 1], tag: 1 },
            BoundaryEdge { vertices: [1, 2], tag: 1 },
        ],
    );
    assert!(r.is_err());
}

#[test]
fn cylinder_channel_statistics() {
    let mesh = gen_cylinder_channel().unwrap();
    assert_eq!(mesh.vertex_count(), 486);
    assert_eq!(mesh.triangle_count(), 814);
    assert_eq!(mesh.boundary_edges().len(), 158);
    // One hole: V - E + T = 0.
    assert_eq!(mesh.euler_characteristic(), 0);
    let tags: std::collections::BTreeSet<u32> =
        mesh.boundary_edges().iter().map(|b| b.tag).collect();
    assert_eq!(
        tags.into_iter().collect::<Vec<_>>(),
        vec![
            channel_tags::INFLOW,
            channel_tags::OUTFLOW,
            channel_tags::WALL,
            channel_tags::CYLINDER
        ]
    );
    // Channel minus cylinder-polygon area; the polygon is slightly smaller
    // than the disk of radius 0.05.
    let area = total_area(&mesh);
    let disk = std::f64::consts::PI * 0.05 * 0.05;
    assert!(area < 2.2 * 0.41 && area > 2.2 * 0.41 - disk * 1.01);
    mesh.with_node_normals().unwrap();
}

#[test]
fn cylinder_normals_point_into_the_hole() {
    let mesh = gen_cylinder_channel().unwrap().with_node_normals().unwrap();
    for (&v, n) in mesh.node_normals() {
        let p = mesh.vertices()[v];
        let dx = p[0] - 0.2;
        let dy = p[1] - 0.2;
        if (dx * dx + dy * dy).sqrt() < 0.06 {
            // On the cylinder the outward normal of the fluid domain points
            // towards the cylinder center.
            let dot = n[0] * dx + n[1] * dy;
            assert!(dot < 0.0, "normal at {p:?} points away from the hole");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_meshes_validate(m in 1usize..12, beta in 0.0f64..0.9) {
        let mesh = gen_stretched_square(m, beta).unwrap();
        mesh.validate().unwrap();
        prop_assert_eq!(mesh.vertex_count(), (m + 1) * (m + 1));
        prop_assert_eq!(mesh.triangle_count(), 2 * m * m);
        prop_assert_eq!(mesh.euler_characteristic(), 1);
        prop_assert!((total_area(&mesh) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_validates_and_scales(m in 1usize..5, n in 1usize..4) {
        let fine = gen_unit_square(m).unwrap().refine_uniform(n).unwrap();
        fine.validate().unwrap();
        prop_assert_eq!(fine.triangle_count(), 2 * m * m * n * n);
        prop_assert_eq!(fine.vertex_count(), (m * n + 1) * (m * n + 1));
    }
}
