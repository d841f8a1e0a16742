mod common;

use common::{oracle_distance, schema_errors};
use vmap::datasets::builtin;
use vmap::document::LayoutDocument;
use vmap::render::{count_elements, cut_lines, expected_element_count, render_svg, RenderOptions};
use vmap::router::{channel_occludes, route_query, RouteMode};
use vmap::service::{LayoutService, QueryError};
use vmap::{run_layout, LayoutOptions};

fn quick(seed: u64) -> LayoutOptions {
    LayoutOptions {
        stages: 64,
        seed,
        ..LayoutOptions::default()
    }
}

#[test]
fn channels_avoid_rectangles_and_are_shortest() {
    for name in ["les-miserables", "netherlands"] {
        let loaded = builtin(name).unwrap();
        let out = run_layout(&loaded, &quick(3)).unwrap();
        let doc = &out.document;
        let graph = doc.graph().unwrap();
        let net = doc.network().unwrap();
        assert_eq!(net.component_count(), 1, "{name}");
        let rects = doc.rects();
        for v in 0..graph.len() {
            let channels = vmap::router::ego_network(&net, &graph, v).unwrap();
            assert_eq!(channels.len(), graph.neighbors(v).len());
            for ch in &channels {
                assert!(!channel_occludes(ch, &rects, 1.0), "{name}: {} -> {}", ch.source, ch.target);
            }
        }
        for (a, b) in [(0, graph.len() - 1), (1, graph.len() / 2), (2, 5)] {
            if let Ok(route) = route_query(&net, &graph, a, b, RouteMode::ShortestHop) {
                for ch in &route.channels {
                    assert!(!channel_occludes(ch, &rects, 1.0));
                    let oracle = oracle_distance(doc, ch.source, ch.target);
                    assert!((ch.length - oracle).abs() <= 1e-9 * oracle.max(1.0), "{name}");
                }
            }
        }
    }
}

#[test]
fn javert_ego_network() {
    let loaded = builtin("les-miserables").unwrap();
    let service = LayoutService::new(run_layout(&loaded, &quick(1)).unwrap().document).unwrap();
    assert_eq!(service.ego("Javert").unwrap().len(), 17);
    assert_eq!(service.ego("Javert").unwrap().len(), 17);
    assert!(matches!(service.ego("Nobody"), Err(QueryError::UnknownVertex(_))));
}

#[test]
fn document_round_trip_is_exact() {
    let loaded = builtin("blood").unwrap();
    let mut options = quick(2);
    options.precompute_ego = true;
    let doc = run_layout(&loaded, &options).unwrap().document;
    let json = doc.to_json();
    let back = LayoutDocument::from_json(&json).unwrap();
    assert_eq!(back, doc);
    for (a, b) in back.vertices.iter().zip(&doc.vertices) {
        assert_eq!(a.rect.x.to_bits(), b.rect.x.to_bits());
        assert_eq!(a.rect.w.to_bits(), b.rect.w.to_bits());
    }
    assert_eq!(back.to_json(), json);
    assert_eq!(doc.vertices.len(), 8);
    assert_eq!(doc.edges.len(), 19);
}

#[test]
fn bordered_areas_match_weights_without_weight_perturbation() {
    let loaded = builtin("germany").unwrap();
    let mut options = quick(4);
    options.weight_perturbation = false;
    let doc = run_layout(&loaded, &options).unwrap().document;
    assert!(doc.metrics.areal_error < 1e-9);
    for v in &doc.vertices {
        assert!((v.alpha_p - v.alpha).abs() < 1e-9 * v.alpha.max(1e-3));
    }
}

#[test]
fn svg_element_count() {
    let loaded = builtin("les-miserables").unwrap();
    let out = run_layout(&loaded, &quick(5)).unwrap();
    let doc = out.document;
    let plain = RenderOptions::default();
    let svg = render_svg(&doc, &plain);
    assert_eq!(count_elements(&svg), expected_element_count(&doc, &plain));
    assert_eq!(svg, render_svg(&doc, &plain));

    let service = LayoutService::new(doc.clone()).unwrap();
    let overlay = RenderOptions {
        channels: service.ego("Valjean").unwrap().to_vec(),
        highlighted: vec!["Valjean".into()],
        hide_labels: false,
        cuts: cut_lines(&out.bordered),
    };
    let svg = render_svg(&doc, &overlay);
    assert_eq!(count_elements(&svg), expected_element_count(&doc, &overlay));
    assert_eq!(overlay.cuts.len(), doc.vertices.len() - 1);

    let rects = doc.rects();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            assert_eq!(rects[i].overlap_area(&rects[j]), 0.0);
        }
    }
}

#[test]
fn single_vertex_layout() {
    let loaded = vmap::graph::load_graph(r#"{"vertices":[{"id":"solo","weight":2.0}],"edges":[]}"#).unwrap();
    let doc = run_layout(&loaded, &quick(0)).unwrap().document;
    assert_eq!(doc.vertices.len(), 1);
    assert!(doc.bridges.is_empty());
    let svg = render_svg(&doc, &RenderOptions::default());
    assert_eq!(svg.matches("<rect ").count(), 2);
}

#[test]
fn explicit_border_that_does_not_fit_is_rejected() {
    let loaded = builtin("les-miserables").unwrap();
    let mut options = quick(0);
    options.border = Some(200.0);
    assert!(run_layout(&loaded, &options).is_err());
}

#[test]
fn document_matches_published_schema() {
    let loaded = builtin("les-miserables").unwrap();
    let mut options = quick(6);
    options.precompute_ego = true;
    let doc = run_layout(&loaded, &options).unwrap().document;
    let value: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
    assert_eq!(schema_errors(&value, None), Vec::<String>::new());

    let mut broken = value.clone();
    broken["vertices"][0]["rect"]["z"] = 1.0.into();
    assert!(!schema_errors(&broken, None).is_empty());

    let service = LayoutService::new(doc).unwrap();
    let path = service.path("Javert", "Myriel", RouteMode::ShortestHop).unwrap();
    assert!(schema_errors(&serde_json::to_value(&path).unwrap(), Some("path")).is_empty());
}
