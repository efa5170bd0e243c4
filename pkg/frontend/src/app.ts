// DOM wiring for the organizer console.  All state shown here is a rendering
// of service responses; round submission is the only write path.

import { ApiError, MatchplanClient, offendingPlayer } from "./api.js";
import {
  buildGrid,
  checkboxDisabled,
  completeGraphPayload,
  progress,
} from "./grid.js";
import type { CreateSessionBody, RoundRecord, SessionSummary } from "./types.js";

interface UiState {
  client: MatchplanClient;
  session: SessionSummary | null;
  rounds: RoundRecord[];
  budgets: Record<string, number>;
  finished: boolean;
}

const state: UiState = {
  client: new MatchplanClient(defaultBaseUrl()),
  session: null,
  rounds: [],
  budgets: {},
  finished: false,
};

function defaultBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? localStorage.getItem("matchplan-api") ?? "http://127.0.0.1:8000";
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function showError(message: string): void {
  const box = el<HTMLDivElement>("error-box");
  box.textContent = message;
  box.hidden = message === "";
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    const culprit = err.status === 409 ? offendingPlayer(err) : null;
    if (culprit) {
      return `budget used up: ${culprit}`;
    }
    return typeof err.detail === "string" ? err.detail : JSON.stringify(err.detail);
  }
  return String(err);
}

async function createSession(event: Event): Promise<void> {
  event.preventDefault();
  showError("");
  try {
    const base = el<HTMLInputElement>("api-url").value.trim();
    localStorage.setItem("matchplan-api", base);
    state.client = new MatchplanClient(base);

    const body: CreateSessionBody = { graph: { vertices: [], edges: [] } };
    const upload = el<HTMLTextAreaElement>("graph-json").value.trim();
    if (upload) {
      body.graph = JSON.parse(upload);
    } else {
      const n = Number(el<HTMLInputElement>("player-count").value);
      if (!Number.isInteger(n) || n < 2) {
        showError("need at least 2 players");
        return;
      }
      body.graph = completeGraphPayload(n);
    }
    body.budgets = Number(el<HTMLInputElement>("budget").value);
    const mode = el<HTMLSelectElement>("mode").value as "online" | "prefixed";
    body.mode = mode;
    if (mode === "prefixed") {
      const text = el<HTMLTextAreaElement>("absences-json").value.trim();
      body.absences = text ? JSON.parse(text) : {};
    }
    const engine = el<HTMLSelectElement>("engine").value;
    if (engine !== "auto") {
      body.engine = engine;
    }
    const session = await state.client.createSession(body);
    state.session = session;
    state.rounds = [...session.rounds];
    state.budgets = { ...session.budgets };
    state.finished = session.finished;
    render();
  } catch (err) {
    showError(describeError(err));
  }
}

async function runRound(): Promise<void> {
  if (!state.session || state.finished) {
    return;
  }
  showError("");
  const absent = Array.from(
    document.querySelectorAll<HTMLInputElement>("#absence-boxes input:checked"),
  ).map((box) => box.value);
  try {
    const result = await state.client.postRound(
      state.session.id, absent, state.rounds.length + 1);
    state.rounds.push({ absent: result.absent, matches: result.matches });
    state.budgets = result.budgets;
    state.finished = result.finished;
    render();
    const last = el<HTMLDivElement>("last-pairings");
    last.textContent = result.matches.length
      ? "pairings: " + result.matches.map(([a, b]) => `${a} vs ${b}`).join(", ")
      : "no playable match this round";
  } catch (err) {
    showError(describeError(err));
  }
}

async function exportTimetable(format: "csv" | "json"): Promise<void> {
  if (!state.session) {
    return;
  }
  try {
    const text = await state.client.fetchTimetable(state.session.id, format);
    const blob = new Blob([text], { type: format === "csv" ? "text/csv" : "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `timetable.${format}`;
    link.click();
    URL.revokeObjectURL(link.href);
  } catch (err) {
    showError(describeError(err));
  }
}

function render(): void {
  const session = state.session;
  el<HTMLDivElement>("session-panel").hidden = session === null;
  if (!session) {
    return;
  }
  el<HTMLSpanElement>("session-title").textContent =
    `session ${session.id.slice(0, 8)}… — engine ${session.engine}, ` +
    `declared limit ${session.limit} rounds`;
  const info = progress(state.rounds.length, session.limit, state.finished);
  const badge = el<HTMLSpanElement>("progress");
  badge.textContent = info.text;
  badge.className = info.onTrack ? "ok" : "late";

  const boxes = el<HTMLDivElement>("absence-boxes");
  boxes.innerHTML = "";
  for (const player of session.players) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = player;
    box.disabled = state.finished || checkboxDisabled(player, state.budgets);
    label.append(box, ` ${player} (${state.budgets[player] ?? 0} left)`);
    boxes.append(label);
  }
  el<HTMLButtonElement>("run-round").disabled = state.finished;

  const table = el<HTMLTableElement>("grid");
  table.innerHTML = "";
  const head = table.insertRow();
  head.insertCell().textContent = "player";
  state.rounds.forEach((_, i) => (head.insertCell().textContent = `round ${i + 1}`));
  const grid = buildGrid(session.players, state.rounds);
  session.players.forEach((player, i) => {
    const row = table.insertRow();
    row.insertCell().textContent = player;
    grid[i].forEach((cell) => {
      const td = row.insertCell();
      td.textContent = cell.text;
      td.className = cell.kind;
    });
  });
}

export function wire(): void {
  el<HTMLInputElement>("api-url").value = state.client.baseUrl;
  el<HTMLFormElement>("create-form").addEventListener("submit", createSession);
  el<HTMLButtonElement>("run-round").addEventListener("click", () => void runRound());
  el<HTMLButtonElement>("export-csv").addEventListener("click", () => void exportTimetable("csv"));
  el<HTMLButtonElement>("export-json").addEventListener("click", () => void exportTimetable("json"));
  el<HTMLSelectElement>("mode").addEventListener("change", () => {
    el<HTMLDivElement>("prefixed-extra").hidden =
      el<HTMLSelectElement>("mode").value !== "prefixed";
  });
}

if (typeof document !== "undefined" && document.getElementById("create-form")) {
  wire();
}
