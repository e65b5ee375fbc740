use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use stalebayes_core::{sprinkler_graph, DelayedGraph, LocalClock, Result, StampedEvent};

use crate::fsio::{parse_hours, read_to_string};

#[derive(Args)]
pub struct QueryArgs {
    /// Graph description (JSON); defaults to the built-in two-node graph.
    #[arg(long, conflicts_with_all = ["lambda", "p"])]
    graph: Option<PathBuf>,
    /// Decay rate of the built-in graph's edge.
    #[arg(long, default_value_t = 0.25)]
    lambda: f64,
    /// Long-run humidity marginal of the built-in graph.
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    /// Node to query.
    #[arg(long, default_value = "sprinkler")]
    target: String,
    /// Evidence variable.
    #[arg(long, default_value = "humidity")]
    variable: String,
    /// Observed evidence value.
    #[arg(long, action = clap::ArgAction::Set)]
    value: bool,
    /// Age of the evidence at query time (hours; h/m suffixes allowed).
    #[arg(long, value_parser = parse_hours)]
    delay: f64,
}

pub fn run(args: QueryArgs) -> Result<i32> {
    let graph = match &args.graph {
        Some(path) => DelayedGraph::from_json(&read_to_string(path)?)?,
        None => sprinkler_graph(args.lambda, args.p)?,
    };
    // Synthesize the stored event: its stamped delay is the age the caller
    // quoted, measured against a clock sitting at the event's arrival time.
    let clock = LocalClock::new();
    let evidence = StampedEvent {
        source_id: "query".into(),
        variable: args.variable.clone(),
        value: args.value,
        delay_at_arrival_h: args.delay,
        arrival_local_time_h: clock.now_h(),
    };
    let p_on = graph.query_delayed(&args.target, &evidence, &clock)?;
    let out = json!({
        "target": args.target,
        "variable": args.variable,
        "value": args.value,
        "delay_h": args.delay,
        "p_on": p_on,
    });
    println!("{out}");
    Ok(0)
}
