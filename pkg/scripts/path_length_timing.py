#!/usr/bin/env python3
"""Time decisions against a linear chain as the request path grows.

Builds a chain graph c0-c1-...-cN in memory, loads a single permit rule
whose pattern reaches up to N hops from c0, then decides requests whose
explicit paths cover 1..L hops and prints per-length latency statistics.
The interesting observation is the flat profile: the request path length
changes the intersection check, not the traversal work.
"""

import argparse
import statistics
import time

from graphpdp.graph_store import EdgeRecord, PropertyGraph, VertexRecord
from graphpdp.pdp import DecisionEngine
from graphpdp.policy_model import parse_policy
from graphpdp.request_model import parse_request

POLICY_TEMPLATE = """\
<Policy xmlns="urn:oasis:names:tc:xacml:3.0:core:schema:wd-17"
        xmlns:xacml4g="xacml4g:1.0"
        PolicyId="chainWalk"
        RuleCombiningAlgId="urn:oasis:names:tc:xacml:1.0:rule-combining-algorithm:first-applicable">
  <xacml4g:Meta>
    <xacml4g:Vertices>
      <xacml4g:VertexEntity>chain</xacml4g:VertexEntity>
    </xacml4g:Vertices>
    <xacml4g:Edges>
      <xacml4g:EdgeEntity>link</xacml4g:EdgeEntity>
    </xacml4g:Edges>
  </xacml4g:Meta>
  <Rule RuleId="walk" Effect="Permit">
    <xacml4g:Pattern PatternId="chainReach">
      <xacml4g:Path>
        <xacml4g:Vertex Category="urn:oasis:names:tc:xacml:1.0:subject-category:access-subject"
                        VertexId="s">
          <AnyOf>
            <AllOf>
              <Match MatchId="urn:oasis:names:tc:xacml:1.0:function:string-equal">
                <AttributeValue>c0</AttributeValue>
                <AttributeDesignator AttributeId="_key"
                                     Category="xacml4g:1.0:path-category:vertex"/>
              </Match>
            </AllOf>
          </AnyOf>
        </xacml4g:Vertex>
        <xacml4g:Edge MaxLength="{max_hops}" Category="xacml4g:1.0:path-category:edge"/>
        <xacml4g:Vertex Category="urn:oasis:names:tc:xacml:3.0:attribute-category:resource"/>
      </xacml4g:Path>
    </xacml4g:Pattern>
  </Rule>
</Policy>
"""


def build_chain(edges: int) -> PropertyGraph:
    graph = PropertyGraph()
    for i in range(edges + 1):
        graph.add_vertex(VertexRecord(f"c{i}", "chain", {"_key": f"c{i}"}))
    for i in range(edges):
        graph.add_edge(EdgeRecord(f"l{i}", "link", f"c{i}", f"c{i+1}", {}))
    return graph


def chain_request(length: int) -> str:
    groups = [
        _group(
            "urn:oasis:names:tc:xacml:1.0:subject-category:access-subject",
            "urn:oasis:names:tc:xacml:1.0:subject:subject-id",
            "_key:c0",
        )
    ]
    for i in range(1, length):
        groups.append(
            _group(
                "xacml4g:1.0:path-category:vertex",
                "xacml4g:1.0:path:vertex-id",
                f"_key:c{i}",
            )
        )
    groups.append(
        _group(
            "urn:oasis:names:tc:xacml:3.0:attribute-category:resource",
            "urn:oasis:names:tc:xacml:1.0:resource:resource-id",
            f"_key:c{length}",
        )
    )
    body = "\n".join(groups)
    return (
        '<Request xmlns="urn:oasis:names:tc:xacml:3.0:core:schema:wd-17"\n'
        '         xmlns:xacml4g="xacml4g:1.0">\n'
        f"  <xacml4g:PathAttributes>\n{body}\n  </xacml4g:PathAttributes>\n"
        "</Request>\n"
    )


def _group(category: str, attribute_id: str, value: str) -> str:
    return (
        f'    <Attributes Category="{category}">\n'
        f'      <Attribute AttributeId="{attribute_id}">\n'
        f"        <AttributeValue>{value}</AttributeValue>\n"
        "      </Attribute>\n"
        "    </Attributes>"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-hops", type=int, default=8, help="chain length")
    parser.add_argument(
        "--lengths", type=int, default=5, help="longest request path to time"
    )
    parser.add_argument("--runs", type=int, default=100, help="decisions per length")
    args = parser.parse_args()
    if args.lengths > args.max_hops:
        parser.error("--lengths cannot exceed --max-hops")

    graph = build_chain(args.max_hops)
    policy = parse_policy(POLICY_TEMPLATE.format(max_hops=args.max_hops))
    engine = DecisionEngine([policy], graph)

    print(f"chain of {args.max_hops} edges, {args.runs} runs per length")
    print(f"{'length':>6}  {'decision':>8}  {'median_us':>10}  {'p90_us':>8}")
    baseline = None
    for length in range(1, args.lengths + 1):
        request = parse_request(chain_request(length))
        decision = engine.decide(request).decision.value
        samples = []
        for _ in range(args.runs):
            started = time.perf_counter()
            engine.decide(request)
            samples.append(time.perf_counter() - started)
        samples.sort()
        median = statistics.median(samples) * 1e6
        p90 = samples[int(len(samples) * 0.9)] * 1e6
        if baseline is None:
            baseline = median
        print(
            f"{length:>6}  {decision:>8}  {median:>10.1f}  {p90:>8.1f}"
            f"  ({median / baseline:.2f}x)"
        )


if __name__ == "__main__":
    main()
