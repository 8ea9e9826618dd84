#!/usr/bin/env python3
"""Regenerates the bundled scripted fixtures under data/.

synthetic/  collapse-separation task: the critic only rewards routes that
            touch one of three fixed slots, and the encoder only trusts a
            specialised slot group once its key slot shows sr >= 0.6.
demo/       small arithmetic task exercising every role, including
            attribution of GENERAL findings and input-dependent routing.
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent

DIRECTIVES = [
    "Restate the question in one sentence before answering.",
    "List the given quantities explicitly.",
    "Work through the problem step by step.",
    "Check the final answer against the question.",
    "Prefer the simplest interpretation of ambiguous wording.",
    "Keep intermediate results exact until the last step.",
    "State any assumption you make.",
    "Answer with the final value only.",
    "Break compound questions into parts.",
    "Double-check units and signs.",
    "Eliminate clearly wrong options first.",
    "Use a worked example when the rule is abstract.",
    "Do not repeat the question verbatim.",
    "Estimate the magnitude before computing.",
    "Follow every formatting constraint literally.",
    "Stop as soon as the answer is established.",
]


def tagged(prefix):
    return [f"[{prefix}{k:02d}] {text}" for k, text in enumerate(DIRECTIVES)]


def rule(role, pattern, response, kind="substring", on=None, max_uses=None):
    r = {"role": role, "match_kind": kind, "pattern": pattern, "response": response}
    if on:
        r["on"] = on
    if max_uses is not None:
        r["max_uses"] = max_uses
    return r


def instinct_updaters(prefix):
    return [
        rule("updater", f"Current text:\n[{prefix}{k:02d}]",
             f"[{prefix}{k:02d}] {text} Be explicit about it.")
        for k, text in enumerate(DIRECTIVES)
    ]


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


def write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2) + "\n")


def synthetic():
    out = ROOT / "synthetic"
    out.mkdir(exist_ok=True)
    groups = {"B": [4, 5, 6, 7], "C": [8, 9, 10, 11], "D": [12, 13, 14, 15]}
    keys = {"B": 5, "C": 9, "D": 13}
    dataset = []
    for i in range(12):
        t = "BCD"[i % 3]
        dataset.append({"input": f"[type-{t}] case {i + 1}", "reference": "correct"})
    write_jsonl(out / "dataset.jsonl", dataset)

    rules = []
    for t, key in keys.items():
        rules.append(rule(
            "encoder",
            rf"^Task: \[type-{t}\][^\n]*\n(?:[^\n]*\n)*?{key}: [^\n]*\(sr=(0\.[6-9]\d\d|1\.000)\)",
            ", ".join(map(str, groups[t])), kind="regex"))
    rules.append(rule("encoder", "Task:", "0, 1, 2, 3"))
    rules.append(rule("generator", "Task:", "{{user_content}}"))
    rules.append(rule("target", r"\[s(05|09|13)\]", "correct", kind="regex", on="system"))
    rules.append(rule("target", "", "incorrect", on="system"))
    rules.append(rule("critic", "Response: correct\nReference:", "SEVERITY: 0.0"))
    findings = "\n".join(
        ["FINDING[ROUTING]: the selected instincts do not cover this case.",
         "FINDING[GENERATOR]: the prompt gives no decisive directive."]
        + [f"FINDING[INSTINCT:{k}]: directive did not help here." for k in range(16)])
    rules.append(rule("critic", "Response:", "SEVERITY: 0.7\n" + findings))
    rules.append(rule("attribution", "Component:", "NONE"))
    rules.append(rule("updater", "Component: routing policy",
                      "Select instincts whose success rate is proven for this input type."))
    rules.append(rule("updater", "Component: composition policy",
                      "List the selected instincts verbatim as the prompt."))
    rules += instinct_updaters("s")
    write_jsonl(out / "fixture.jsonl", rules)

    write_json(out / "config.json", {
        "backend": "scripted",
        "fixture": "fixture.jsonl",
        "dataset": "dataset.jsonl",
        "out": "../../build/runs/synthetic",
        "k": 16, "s": 4, "epochs": 20, "batch_size": 12, "seed": 7,
        "init": "expert",
        "seed_texts": tagged("s"),
        "reward": "exact_match",
    })


def demo():
    out = ROOT / "demo"
    out.mkdir(exist_ok=True)
    items = [
        ("[alpha] What is 2 + 3?", "5", "5"),
        ("[alpha] What is 7 * 6?", "42", "42"),
        ("[alpha] What is 15 - 9?", "6", "4"),
        ("[alpha] What is 81 / 9?", "9", "9"),
        ("[alpha] What is 12 + 30?", "42", "42"),
        ("[beta] How many legs do three spiders have?", "24", "24"),
        ("[beta] How many minutes are in 2.5 hours?", "150", "130"),
        ("[beta] How many days are in four weeks?", "28", "28"),
        ("[beta] How many sides do two hexagons have?", "12", "10"),
        ("[beta] How many months are in three years?", "36", "36"),
    ]
    write_jsonl(out / "dataset.jsonl", [{"input": q, "reference": ref} for q, ref, _ in items])

    rules = [
        rule("encoder", r"^Task: \[alpha\]", "1, 3, 5, 7", kind="regex"),
        rule("encoder", r"^Task: \[beta\]", "0, 2, 4, 6", kind="regex"),
        rule("encoder", "Task:", "0, 1, 2, 3"),
        rule("generator", "Task:", "Solve the task below.\n{{user_content}}"),
    ]
    rules += [rule("target", q, answer, kind="exact") for q, _, answer in items]
    rules += [
        rule("target", "", "I am not sure."),
        rule("critic", r"Response: ([^\n]*)\nReference: \1\n", "SEVERITY: 0.0", kind="regex"),
        rule("critic", "Response:",
             "SEVERITY: 0.6\n"
             "FINDING[ROUTING]: no verification instinct was selected for an arithmetic task.\n"
             "FINDING[GENERAL]: the final answer is wrong; the prompt should demand a check "
             "of the result."),
        rule("attribution", "Component: composition policy",
             "The prompt never asks the solver to check its result."),
        rule("attribution", "Component: instinct 3\n",
             "This directive is right but too easy to skip; make the check mandatory."),
        rule("attribution", "Component:", "NONE"),
        rule("updater", "Component: routing policy",
             "Select instincts that cover computation and verification for arithmetic tasks."),
        rule("updater", "Component: composition policy",
             "Compose a short prompt from the selected instincts and end with a "
             "mandatory check of the final answer."),
    ]
    rules += instinct_updaters("d")
    write_jsonl(out / "fixture.jsonl", rules)

    write_json(out / "config.json", {
        "backend": "scripted",
        "fixture": "fixture.jsonl",
        "dataset": "dataset.jsonl",
        "out": "../../build/runs/demo",
        "k": 16, "s": 4, "epochs": 3, "batch_size": 5, "seed": 7,
        "init": "expert",
        "seed_texts": tagged("d"),
        "reward": "exact_match",
    })


if __name__ == "__main__":
    synthetic()
    demo()
