"""Collects one status line per acceptance criterion for the terminal summary."""

LINES = []


def report(number, title, status, detail=""):
    line = f"[{status}] criterion {number:>2}: {title}" + (f" | {detail}" if detail else "")
    LINES.append(line)
    print(line)
    return line
