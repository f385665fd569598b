"""Tour of a gadget instance built from the smallest cubic graph.

Builds the K4 instance at alpha = 2/5 with k = 3 identical vertex items,
prints who values what, and writes the instance + tags files that the CLI
commands consume.
"""

from fractions import Fraction

from nswlab import (
    ReductionParams,
    build_instance,
    named_graph,
    write_instance,
    write_tags,
)

g = named_graph("K4")
print(f"K4: {g.vertex_count} vertices, {g.edge_count} edges (cubic, M = 1.5N)")

params = ReductionParams(alpha=Fraction(2, 5), vertex_item_count=3)
reduced = build_instance(g, params)
inst = reduced.instance

print(f"\nagents (n = N + M = {inst.n}):")
print(" ", ", ".join(inst.agents))
print(f"items (m = k + M + 3N = {inst.m}):")
print(" ", ", ".join(inst.items))

print("\nutility pattern:")
for item in ("vi:0", "ei:0-1", "si:0@0-1"):
    who = inst.interested_agents(item)
    pairs = ", ".join(f"{a}={inst.utility(a, item)}" for a in who)
    print(f"  {item:10s} -> {pairs}")

print("\nevery vertex item interests all vertex agents;")
print("every edge item exactly one agent; every shared item exactly two.")

write_instance(inst, "k4.instance.json")
write_tags(reduced, "k4.tags.json")
print("\nwrote k4.instance.json and k4.tags.json")
