/**
 * Typed client for the hatescope annotation service.
 *
 * Every call goes over HTTP; the client never derives a kappa, a vote, or
 * a gate decision on its own. The agreement payload keeps the exact
 * response body and the source lexeme of every number so views can show
 * the service's values byte for byte.
 */

import {
  RawJson,
  RawNum,
  asArray,
  asNum,
  asNumOrNull,
  asObject,
  asString,
  parseRawJson,
} from "./rawJson.js";

export interface CommentIn {
  id: string;
  text: string;
  timestamp?: number;
  source?: string;
}

export interface RoundCreate {
  roundId?: string;
  comments: CommentIn[];
  annotators: string[];
  kappaThreshold?: number;
  annotatorsPerComment?: number;
}

export interface RoundSummary {
  roundId: string;
  status: string;
  kappaThreshold: number;
  annotatorsPerComment: number;
  annotators: string[];
  nComments: number;
  nRecords: number;
  overallKappa: number | null;
  progress: Record<string, number>;
}

export interface TaskItem {
  id: string;
  text: string;
}

export interface TaskPage {
  roundId: string;
  annotator: string;
  status: string;
  tasks: TaskItem[];
  nTotal: number;
  nDone: number;
}

export interface SubmitResult {
  roundId: string;
  replaced: boolean;
  nRecords: number;
}

export interface GateResult {
  roundId: string;
  status: string;
  overallKappa: number | null;
  kappaThreshold: number;
}

export interface PairKappas {
  a: string;
  b: string;
  overlap: RawNum;
  kappas: Record<string, RawNum | null>;
}

export interface AgreementView {
  pairs: PairKappas[];
  perTarget: Record<string, RawNum | null>;
  overall: RawNum | null;
  undefinedCount: RawNum;
}

export interface AgreementPayload {
  roundId: string;
  withLevels: AgreementView;
  withoutLevels: AgreementView;
  /** The response body exactly as received. */
  body: string;
}

export interface TargetVoteOut {
  level: number;
  support: number;
  tied: boolean;
  candidates: number[];
}

export interface VoteEntry {
  commentId: string;
  codes: number[];
  terms: string[];
  perTarget: Record<string, TargetVoteOut>;
}

export interface TieEntry {
  commentId: string;
  targets: string[];
}

export interface VotesPayload {
  roundId: string;
  votes: VoteEntry[];
  ties: TieEntry[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  const text = await response.text();
  try {
    const parsed = JSON.parse(text) as { detail?: unknown };
    if (typeof parsed.detail === "string") {
      return parsed.detail;
    }
  } catch {
    // not JSON, fall through to the raw text
  }
  return text || response.statusText;
}

export class HatescopeClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async send(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  async createRound(create: RoundCreate): Promise<RoundSummary> {
    const body: Record<string, unknown> = {
      comments: create.comments.map((c) => ({
        id: c.id,
        text: c.text,
        timestamp: c.timestamp ?? null,
        source: c.source ?? "",
      })),
      annotators: create.annotators,
    };
    if (create.roundId !== undefined) {
      body.round_id = create.roundId;
    }
    if (create.kappaThreshold !== undefined) {
      body.kappa_threshold = create.kappaThreshold;
    }
    if (create.annotatorsPerComment !== undefined) {
      body.annotators_per_comment = create.annotatorsPerComment;
    }
    const response = await this.send("POST", "/rounds", body);
    return toSummary(await response.json());
  }

  async round(roundId: string): Promise<RoundSummary> {
    const response = await this.send(
      "GET",
      `/rounds/${encodeURIComponent(roundId)}`,
    );
    return toSummary(await response.json());
  }

  async tasks(roundId: string, annotator: string): Promise<TaskPage> {
    const response = await this.send(
      "GET",
      `/rounds/${encodeURIComponent(roundId)}/tasks` +
        `?annotator=${encodeURIComponent(annotator)}`,
    );
    const data = await response.json();
    return {
      roundId: data.round_id,
      annotator: data.annotator,
      status: data.status,
      tasks: data.tasks,
      nTotal: data.n_total,
      nDone: data.n_done,
    };
  }

  async submitAnnotation(
    roundId: string,
    annotator: string,
    commentId: string,
    codes: number[],
  ): Promise<SubmitResult> {
    const response = await this.send("POST", "/annotations", {
      round_id: roundId,
      annotator_id: annotator,
      comment_id: commentId,
      codes,
    });
    const data = await response.json();
    return {
      roundId: data.round_id,
      replaced: data.replaced,
      nRecords: data.n_records,
    };
  }

  async agreement(roundId: string): Promise<AgreementPayload> {
    const response = await this.send(
      "GET",
      `/rounds/${encodeURIComponent(roundId)}/agreement`,
    );
    const body = await response.text();
    const root = asObject(parseRawJson(body), "agreement payload");
    return {
      roundId: asString(root.round_id, "round_id"),
      withLevels: toAgreementView(root.with_levels),
      withoutLevels: toAgreementView(root.without_levels),
      body,
    };
  }

  async gate(roundId: string): Promise<GateResult> {
    const response = await this.send(
      "POST",
      `/rounds/${encodeURIComponent(roundId)}/gate`,
    );
    const data = await response.json();
    return {
      roundId: data.round_id,
      status: data.status,
      overallKappa: data.overall_kappa,
      kappaThreshold: data.kappa_threshold,
    };
  }

  async votes(roundId: string): Promise<VotesPayload> {
    const response = await this.send(
      "POST",
      `/rounds/${encodeURIComponent(roundId)}/vote`,
    );
    const data = await response.json();
    return {
      roundId: data.round_id,
      votes: data.votes.map(
        (v: {
          comment_id: string;
          codes: number[];
          terms: string[];
          per_target: Record<string, TargetVoteOut>;
        }) => ({
          commentId: v.comment_id,
          codes: v.codes,
          terms: v.terms,
          perTarget: v.per_target,
        }),
      ),
      ties: data.ties.map((t: { comment_id: string; targets: string[] }) => ({
        commentId: t.comment_id,
        targets: t.targets,
      })),
    };
  }
}

function toSummary(data: {
  round_id: string;
  status: string;
  kappa_threshold: number;
  annotators_per_comment: number;
  annotators: string[];
  n_comments: number;
  n_records: number;
  overall_kappa: number | null;
  progress: Record<string, number>;
}): RoundSummary {
  return {
    roundId: data.round_id,
    status: data.status,
    kappaThreshold: data.kappa_threshold,
    annotatorsPerComment: data.annotators_per_comment,
    annotators: data.annotators,
    nComments: data.n_comments,
    nRecords: data.n_records,
    overallKappa: data.overall_kappa,
    progress: data.progress,
  };
}

function toAgreementView(value: RawJson): AgreementView {
  const view = asObject(value, "agreement view");
  const pairs = asArray(view.pairs, "pairs").map((entry) => {
    const pair = asObject(entry, "pair");
    const kappas: Record<string, RawNum | null> = {};
    const rawKappas = asObject(pair.kappas, "kappas");
    for (const slug of Object.keys(rawKappas)) {
      kappas[slug] = asNumOrNull(rawKappas[slug], `kappa ${slug}`);
    }
    return {
      a: asString(pair.a, "pair.a"),
      b: asString(pair.b, "pair.b"),
      overlap: asNum(pair.overlap, "pair.overlap"),
      kappas,
    };
  });
  const perTarget: Record<string, RawNum | null> = {};
  const rawPerTarget = asObject(view.per_target, "per_target");
  for (const slug of Object.keys(rawPerTarget)) {
    perTarget[slug] = asNumOrNull(rawPerTarget[slug], `per_target ${slug}`);
  }
  return {
    pairs,
    perTarget,
    overall: asNumOrNull(view.overall, "overall"),
    undefinedCount: asNum(view.undefined_count, "undefined_count"),
  };
}
