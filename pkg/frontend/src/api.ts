// Typed client for the local gateway API. The browser never sees key
// material or does any group arithmetic: everything it renders is what
// the gateway returns, and every state change goes through one of these
// calls (the request log makes that auditable).

export interface Me {
  user_id: string;
  display_name: string;
  server_url: string;
  group_label: string;
  held_keys: string[];
}

export interface DirectoryUser {
  user_id: string;
  display_name: string;
  public_key: string;
}

export type EntryStatus = "public" | "decrypted" | "pending" | "locked";

export interface FeedEntry {
  content_id: string;
  owner_id: string;
  visibility: "public" | "private" | "circle";
  circle_id: string | null;
  epoch: number | null;
  protected: boolean;
  status: EntryStatus;
  text: string | null;
  missing_keys: string[];
  mine: boolean;
}

export interface ShareRequest {
  request_id: string;
  content_id: string;
  requester_id: string;
  key_ids: string[];
  created_at: number;
}

export interface Circle {
  circle_id: string;
  owner_id: string;
  name: string;
  member_ids: string[];
  proxy_key_ids: string[];
  epoch: number;
}

export interface ComposeRequest {
  text: string;
  visibility: "public" | "private" | "circle";
  to_users: string[];
  via_keys: string[];
  new_key_holders: string[];
  circle_id: string | null;
}

export interface LoggedCall {
  method: string;
  path: string;
}

export class GatewayError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  readonly requestLog: LoggedCall[] = [];

  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.requestLog.push({ method, path });
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status}`;
      try {
        const payload = (await response.json()) as { code?: string; message?: string };
        code = payload.code ?? code;
        message = payload.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new GatewayError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  me(): Promise<Me> {
    return this.call("GET", "/api/me");
  }

  directory(): Promise<DirectoryUser[]> {
    return this.call<{ users: DirectoryUser[] }>("GET", "/api/directory").then((r) => r.users);
  }

  feed(): Promise<FeedEntry[]> {
    return this.call<{ entries: FeedEntry[] }>("GET", "/api/feed").then((r) => r.entries);
  }

  compose(body: ComposeRequest): Promise<string> {
    return this.call<{ content_id: string }>("POST", "/api/compose", body).then(
      (r) => r.content_id,
    );
  }

  inbox(): Promise<ShareRequest[]> {
    return this.call<{ requests: ShareRequest[] }>("GET", "/api/inbox").then((r) => r.requests);
  }

  approve(requestId: string): Promise<boolean> {
    return this.call<{ answered: boolean }>(
      "POST",
      `/api/inbox/${requestId}/approve`,
    ).then((r) => r.answered);
  }

  deny(requestId: string): Promise<void> {
    return this.call("POST", `/api/inbox/${requestId}/deny`).then(() => undefined);
  }

  revoke(contentId: string, viewerId: string): Promise<boolean> {
    return this.call<{ deleted: boolean }>("POST", "/api/revoke", {
      content_id: contentId,
      viewer_id: viewerId,
    }).then((r) => r.deleted);
  }

  circles(): Promise<Circle[]> {
    return this.call<{ circles: Circle[] }>("GET", "/api/circles").then((r) => r.circles);
  }

  createCircle(name: string, memberIds: string[]): Promise<string> {
    return this.call<{ circle_id: string }>("POST", "/api/circles", {
      name,
      member_ids: memberIds,
    }).then((r) => r.circle_id);
  }

  joinCircle(circleId: string): Promise<void> {
    return this.call("POST", `/api/circles/${circleId}/join`).then(() => undefined);
  }

  rotateCircle(circleId: string): Promise<number> {
    return this.call<{ epoch: number }>("POST", `/api/circles/${circleId}/rotate`).then(
      (r) => r.epoch,
    );
  }
}
