// API payloads, mirrored from the scheduling service's JSON responses.

export type MatchPair = [string, string];

export interface RoundRecord {
  absent: string[];
  matches: MatchPair[];
}

export interface SessionSummary {
  id: string;
  mode: string;
  engine: string;
  note?: string;
  limit: number;
  players: string[];
  budgets: Record<string, number>;
  initial_budgets: Record<string, number>;
  round: number;
  finished: boolean;
  remaining: MatchPair[];
  rounds: RoundRecord[];
}

export interface RoundResult {
  round: number;
  absent: string[];
  matches: MatchPair[];
  budgets: Record<string, number>;
  finished: boolean;
  rounds_played: number;
  timetable?: string[][];
}

export interface GraphPayload {
  vertices: string[];
  edges: MatchPair[];
  budgets?: Record<string, number>;
}

export interface CreateSessionBody {
  graph: GraphPayload;
  budgets?: number | Record<string, number>;
  mode?: "online" | "prefixed";
  engine?: string;
  absences?: Record<string, number[]>;
}
