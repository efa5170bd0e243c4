// Pure view-model builders: everything displayed derives from service
// responses, with no scheduling logic of its own.

import type { RoundRecord } from "./types.js";

export interface GridCell {
  kind: "opponent" | "free" | "absent";
  text: string;
}

/** players-by-rounds grid in the reference timetable layout. */
export function buildGrid(players: string[], rounds: RoundRecord[]): GridCell[][] {
  return players.map((player) =>
    rounds.map((round) => {
      if (round.absent.includes(player)) {
        return { kind: "absent", text: "ABSENT" } as GridCell;
      }
      for (const [a, b] of round.matches) {
        if (a === player) {
          return { kind: "opponent", text: b } as GridCell;
        }
        if (b === player) {
          return { kind: "opponent", text: a } as GridCell;
        }
      }
      return { kind: "free", text: "free" } as GridCell;
    }),
  );
}

/** The grid rendered in the exact shape of the service's CSV export. */
export function gridRows(players: string[], rounds: RoundRecord[]): string[][] {
  const header = ["player", ...rounds.map((_, i) => `round ${i + 1}`)];
  const grid = buildGrid(players, rounds);
  return [header, ...players.map((p, i) => [p, ...grid[i].map((cell) => cell.text)])];
}

export function gridCsv(players: string[], rounds: RoundRecord[]): string {
  return gridRows(players, rounds).map((row) => row.join(",")).join("\n") + "\n";
}

/** Advisory client-side budget view; the service stays authoritative. */
export function remainingBudgets(
  initial: Record<string, number>,
  rounds: RoundRecord[],
): Record<string, number> {
  const left: Record<string, number> = { ...initial };
  for (const round of rounds) {
    for (const player of round.absent) {
      left[player] = (left[player] ?? 0) - 1;
    }
  }
  return left;
}

export function checkboxDisabled(player: string, budgets: Record<string, number>): boolean {
  return (budgets[player] ?? 0) <= 0;
}

export interface Progress {
  onTrack: boolean;
  text: string;
}

export function progress(roundsPlayed: number, limit: number, finished: boolean): Progress {
  if (finished) {
    return { onTrack: true, text: `finished in ${roundsPlayed} of ${limit} rounds` };
  }
  const onTrack = roundsPlayed <= limit;
  return {
    onTrack,
    text: onTrack
      ? `round ${roundsPlayed} of at most ${limit}`
      : `over the declared limit of ${limit}`,
  };
}

/** K_n helper for the create form; the service validates again. */
export function completeGraphPayload(n: number): { vertices: string[]; edges: [string, string][] } {
  const vertices = Array.from({ length: n }, (_, i) => String(i + 1));
  const edges: [string, string][] = [];
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      edges.push([vertices[i], vertices[j]]);
    }
  }
  return { vertices, edges };
}
