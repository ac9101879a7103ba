"""Builds trace.jsonl: the static record of ./extension plus two scripted runtime routes.

Usage: python3 make_trace.py <static-trace.jsonl>  (from `wscan scan --ext extension --trace-out ...`)
"""
import hashlib
import json
import sys

MNEMONIC = "legal winner thank year wave sausage worth useful legal winner thank yellow"
PASSWORD = "123456"
SESSION_KEY = "7f3e9a1c5b2d4e6f8a0b1c2d3e4f5a6b"

scan = json.loads(open(sys.argv[1]).readline())
scan["target_path"] = "fixtures/replay/extension"
scan["started_at"] = "2026-01-05T10:00:00Z"

vault = json.dumps({"cipher": "U2FsdGVkX1+q0Rk8", "pw": PASSWORD})
storage_empty = {"localStorage": {}, "sessionStorage": {}, "indexedDB": {}}
storage_full = {
    "localStorage": {"vault": vault, "pwHash": hashlib.sha256(PASSWORD.encode()).hexdigest()},
    "sessionStorage": {"session_key": SESSION_KEY},
    "indexedDB": {"wallet": {"accounts": {"0": {"address": "0x9858effd232b4033e47d90003d41ec34ecaeda94"}}}},
}
start_html = ("<html><body><h1>Get started</h1><button>Create a new wallet</button>"
              "<button>Import wallet</button></body></html>")
password_html = ("<html><body><h2>Create password</h2><input type=\"password\" placeholder=\"New password\">"
                 "<input type=\"password\" placeholder=\"Confirm password\"><button>Next</button></body></html>")
display_html = ("<html><body><h2>Secret recovery phrase</h2><p>Write it down and keep it safe.</p>"
                "<textarea readonly>" + MNEMONIC + "</textarea><button>Next</button></body></html>")
import_html = ("<html><body><h2>Import with recovery phrase</h2>"
               + "".join("<input type=\"password\">" for _ in range(12)) + "<button>Import</button></body></html>")


def probe():
    return {"attempts": [{"candidate": "123", "accepted": False, "signal": "error_text"},
                         {"candidate": "123456", "accepted": True, "signal": "navigation"}],
            "weakest_accepted": "123456", "inconclusive": False}


def events(route):
    out = []

    def add(t, kind, payload):
        out.append({"id": len(out), "timestamp": t, "kind": kind, "payload": payload})

    add(0.0, "action_log", {"action": "route_start", "route": route})
    add(0.412, "storage_snapshot", storage_empty)
    add(0.412, "html_snapshot", {"url": "chrome-extension://x/popup.html", "html": start_html})
    if route == "create":
        add(3.1, "html_snapshot", {"url": "chrome-extension://x/popup.html#password", "html": password_html})
        add(5.9, "action_log", {"action": "probe", "candidate": "123", "accepted": False, "signal": "error_text"})
        add(8.2, "action_log", {"action": "probe", "candidate": "123456", "accepted": True, "signal": "navigation"})
        add(9.0, "param_capture", {"plan_id": "derive.js#26", "bindings": {"e": PASSWORD}, "captured_at": 1767607209000})
        add(9.0, "param_capture", {"plan_id": "unlock.js#33",
                                   "bindings": {"a": "U2FsdGVkX1+q0Rk8", "b": SESSION_KEY}, "captured_at": 1767607209010})
        add(9.4, "storage_snapshot", storage_full)
        add(9.4, "html_snapshot", {"url": "chrome-extension://x/popup.html#backup", "html": display_html})
        add(12.0, "profile_scan", {"files": [{"path": "Default/Sessions/Session_13350000000000000",
                                              "needle_kind": "mnemonic", "needle": MNEMONIC, "encoding": "utf16"}]})
    else:
        add(2.5, "html_snapshot", {"url": "chrome-extension://x/popup.html#import", "html": import_html})
        add(4.0, "action_log", {"action": "type", "kind": "mnemonic", "boxes": 12})
        add(6.8, "html_snapshot", {"url": "chrome-extension://x/popup.html#password", "html": password_html})
        add(9.9, "param_capture", {"plan_id": "unlock.js#33",
                                   "bindings": {"a": "U2FsdGVkX1+q0Rk8", "b": SESSION_KEY}, "captured_at": 1767607300000})
        add(10.3, "storage_snapshot", storage_full)
    return out


def trace(route, pages, corpus):
    return {"record": "trace", "route_id": route, "extension_id": "abcdefghijklmnopabcdefghijklmnop",
            "completed": True, "failure_reason": None, "sensitive_corpus": corpus, "password_probe": probe(),
            "pages_visited": pages}


create_corpus = {"password_used": PASSWORD, "mnemonic_words": MNEMONIC.split(), "private_keys_observed": [],
                 "intermediate_crypto_values": [SESSION_KEY]}
import_corpus = dict(create_corpus)
lines = [scan]
for route, pages in (("create", ["start", "wallet_creation_preparations", "password_setting", "mnemonic_display"]),
                     ("import", ["start", "import_method_selection", "mnemonic_import", "password_setting", "home",
                                 "wallet_unlock", "home", "wallet_setting", "password_verification",
                                 "wallet_backup"])):
    ev = events(route)
    head = trace(route, pages, create_corpus if route == "create" else import_corpus)
    head["event_count"] = len(ev)
    lines.append(head)
    for e in ev:
        e = dict(e, record="event", route_id=route)
        lines.append(e)
lines.append({"record": "end", "finished_at": "2026-01-05T10:04:31Z"})
with open("trace.jsonl", "w") as f:
    for line in lines:
        f.write(json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n")
