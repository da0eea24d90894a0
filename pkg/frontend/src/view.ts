/**
 * Read-only transcript rendering.
 *
 * Parses the line-delimited JSON transcript the runtime emits and renders
 * it as a static list: one item per cycle (event intent, decision,
 * candidate count, outcome) and a closing item with the final reward.
 */

export interface CycleView {
  cycle: number;
  intent: string;
  chosen: string;
  candidateCount: number;
  memoryVersion: number;
  success: boolean;
  outcome: string;
}

export interface FinalView {
  task: string;
  cycles: number;
  decisions: number;
  reward: number;
}

export interface TranscriptView {
  cycles: CycleView[];
  final: FinalView;
}

function asRecord(value: unknown, context: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new Error(`${context}: not an object`);
  }
  return value as Record<string, unknown>;
}

function field(record: Record<string, unknown>, key: string, context: string): unknown {
  if (!(key in record)) {
    throw new Error(`${context}: missing field ${key}`);
  }
  return record[key];
}

function numberField(record: Record<string, unknown>, key: string, context: string): number {
  const value = field(record, key, context);
  if (typeof value !== "number") {
    throw new Error(`${context}: field ${key} is not a number`);
  }
  return value;
}

function stringField(record: Record<string, unknown>, key: string, context: string): string {
  const value = field(record, key, context);
  if (typeof value !== "string") {
    throw new Error(`${context}: field ${key} is not a string`);
  }
  return value;
}

function booleanField(record: Record<string, unknown>, key: string, context: string): boolean {
  const value = field(record, key, context);
  if (typeof value !== "boolean") {
    throw new Error(`${context}: field ${key} is not a boolean`);
  }
  return value;
}

export function parseTranscript(text: string): TranscriptView {
  const lines = text.split("\n").filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    throw new Error("transcript is empty");
  }
  const cycles: CycleView[] = [];
  let final: FinalView | null = null;
  for (const [index, line] of lines.entries()) {
    const context = `transcript line ${index + 1}`;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      throw new Error(`${context}: invalid JSON`);
    }
    const record = asRecord(parsed, context);
    if ("final" in record) {
      if (index !== lines.length - 1) {
        throw new Error(`${context}: final record before the end`);
      }
      const body = asRecord(record["final"], context);
      final = {
        task: stringField(body, "task", context),
        cycles: numberField(body, "cycles", context),
        decisions: numberField(body, "decisions", context),
        reward: numberField(body, "reward", context),
      };
      continue;
    }
    const event = asRecord(field(record, "event", context), context);
    const decision = asRecord(field(record, "decision", context), context);
    const feedback = asRecord(field(record, "feedback", context), context);
    cycles.push({
      cycle: numberField(record, "cycle", context),
      intent: stringField(event, "intent", context),
      chosen: stringField(decision, "chosen", context),
      candidateCount: numberField(decision, "candidate_count", context),
      memoryVersion: numberField(decision, "memory_version", context),
      success: booleanField(feedback, "success", context),
      outcome: stringField(feedback, "outcome", context),
    });
  }
  if (final === null) {
    throw new Error("transcript has no final record");
  }
  return { cycles, final };
}

/** Matches the runtime's float rendering: whole numbers keep one decimal. */
export function formatReward(reward: number): string {
  return Number.isInteger(reward) ? reward.toFixed(1) : String(reward);
}

function appendRow(item: HTMLElement, className: string, text: string): void {
  const row = item.ownerDocument.createElement("div");
  row.className = className;
  row.textContent = text;
  item.appendChild(row);
}

export function renderTranscript(list: HTMLElement, view: TranscriptView): void {
  list.textContent = "";
  const doc = list.ownerDocument;
  for (const cycle of view.cycles) {
    const item = doc.createElement("li");
    item.className = "cycle";
    appendRow(item, "head", `cycle ${cycle.cycle}`);
    appendRow(item, "row", `event: ${cycle.intent}`);
    appendRow(
      item,
      "row",
      `decision: ${cycle.chosen} (candidates: ${cycle.candidateCount}, memory v${cycle.memoryVersion})`,
    );
    appendRow(item, "row", `outcome: ${cycle.success ? "ok" : "error"}`);
    const outcome = doc.createElement("pre");
    outcome.className = "outcome";
    outcome.textContent = cycle.outcome;
    item.appendChild(outcome);
    list.appendChild(item);
  }
  const item = doc.createElement("li");
  item.className = "final";
  appendRow(
    item,
    "row",
    `task ${view.final.task} | ${view.final.cycles} cycles | ${view.final.decisions} decisions`,
  );
  appendRow(item, "reward", `reward: ${formatReward(view.final.reward)}`);
  list.appendChild(item);
}

export function renderVersion(el: HTMLElement, version: string): void {
  el.textContent = version;
}

export function showError(banner: HTMLElement, message: string): void {
  banner.textContent = message;
  banner.classList.remove("hidden");
}
