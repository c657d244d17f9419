#!/usr/bin/env python3
"""Independent renderer for the prompt golden files.

Reads cases.json, derives context slots on its own and writes <name>.txt
next to this script. Run it after changing a template or a case.
"""
import json
import pathlib
import re

HERE = pathlib.Path(__file__).resolve().parent
DATA = HERE.parents[2] / "data"
TEMPLATES = DATA / "templates"
SLOT = re.compile(r"\[([A-Z][A-Z0-9_]*)\]")
LOOP = "[FOR EACH PARAMETER:]"
TYPES = "fire, fountain, firework, bubbles, trail-effect"


def num(v):
    v = float(v)
    if v == 0:
        return "0"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def fill(line, slots):
    def sub(m):
        if m.group(1) not in slots:
            raise KeyError(m.group(1))
        return slots[m.group(1)]
    return SLOT.sub(sub, line)


def render(body, slots, loop=()):
    out = []
    lines = body.split("\n")
    i = 0
    while i < len(lines):
        if lines[i] == LOOP and i + 1 < len(lines):
            out.extend(fill(lines[i + 1], {**slots, **item}) for item in loop)
            i += 2
            continue
        out.append(fill(lines[i], slots))
        i += 1
    return "\n".join(out)


def context_slots(ctx):
    catalog = json.loads((DATA / "catalog.json").read_text())["parameters"]
    cond = json.loads((TEMPLATES / "conditional.json").read_text())
    objs = ctx.get("scene_objects", [])
    scene = ", ".join(
        "%s at [%s]" % (o["name"], ", ".join(num(c) for c in o["position"])) for o in objs
    ) or "no objects"
    px, py, pz = (float(c) for c in ctx["system_position"])
    sketch = ctx.get("sketch")
    brushes = sketch["used_brushes"] if sketch else []
    state = "present" if brushes else "absent"
    s = {
        "PARTICLE_SYSTEM_TYPE": ctx["system_type"],
        "CURRENT_TYPE": ctx["system_type"],
        "USER_PROMPT": ctx["user_prompt"],
        "USER_INTENT": ctx["user_prompt"],
        "AVAILABLE_TYPES": TYPES,
        "PARAMETER_DETAILS": "\n".join("- %s: %s" % (p["name"], p["description"]) for p in catalog),
        "TECHNICAL_PARAMETERS": ", ".join(p["name"] for p in catalog),
        "PARAMETER_DESCRIPTIONS_JSON": json.dumps(
            {p["name"]: p["description"] for p in catalog}, indent=2, ensure_ascii=False),
        "SCENE_OBJECTS": scene,
        "SCENE_INFO": scene,
        "POSITION_JSON": json.dumps({"x": px, "y": py, "z": pz}, separators=(",", ":")),
        "BRUSH_DESCRIPTIONS_JSON": json.dumps(
            [{"color": b["color"], "functionality": b["functionality"]} for b in brushes], indent=2)
        if brushes else "[]",
    }
    for key in ("AND_SKETCH_IF_PRESENT", "BRUSH_CONTEXT_IF_SKETCH", "VISUAL_CONTEXT_GUIDANCE"):
        s[key] = cond[key][state]
    block = (TEMPLATES / "sketch_context_block.txt").read_text()
    s["SKETCH_CONTEXT_BLOCK"] = render(block, s) if brushes else ""
    if sketch is None:
        s["SKETCH_INFO"] = cond["SKETCH_INFO"]["absent"]
    else:
        info = {
            "strokes": [{"brush_id": st.get("brush_id", 0),
                         "points": [[float(x), float(y)] for x, y in st["points"]]}
                        for st in sketch.get("strokes", [])],
            "used_brushes": [{"brush_id": b.get("brush_id", 0), "color": b["color"],
                              "functionality": b["functionality"]} for b in brushes],
        }
        s["SKETCH_INFO"] = json.dumps(info, separators=(",", ":"))
    return s


def main():
    cases = json.loads((HERE / "cases.json").read_text())["cases"]
    for case in cases:
        slots = context_slots(case["context"]) if "context" in case else {}
        slots.update(case.get("slots", {}))
        body = (TEMPLATES / (case["template"] + ".txt")).read_text()
        text = render(body, slots, case.get("loop", []))
        (HERE / (case["name"] + ".txt")).write_text(text)
        print("wrote", case["name"])


if __name__ == "__main__":
    main()
