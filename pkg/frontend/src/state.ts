// Pure view-model: everything here is plain data in, plain data out, so
// the whole decision surface is unit-testable without a DOM or network.

import type { Circle, ComposeRequest, DirectoryUser, FeedEntry, ShareRequest } from "./api.js";

export interface ViewState {
  userId: string;
  feed: FeedEntry[];
  inbox: ShareRequest[];
  circles: Circle[];
  directory: DirectoryUser[];
  lastError: string | null;
}

export function initialState(userId: string): ViewState {
  return { userId, feed: [], inbox: [], circles: [], directory: [], lastError: null };
}

// Feed entries arrive oldest-first from the gateway; the UI shows newest
// first. Equality by content_id keeps DOM churn down for unchanged rows.
export function mergeFeed(state: ViewState, entries: FeedEntry[]): ViewState {
  return { ...state, feed: [...entries].reverse() };
}

export function mergeInbox(state: ViewState, requests: ShareRequest[]): ViewState {
  return { ...state, inbox: requests };
}

export function inboxBadge(state: ViewState): number {
  return state.inbox.length;
}

export function nameOf(state: ViewState, userId: string): string {
  const user = state.directory.find((u) => u.user_id === userId);
  return user ? user.display_name : userId;
}

// Entries the current user owns and could revoke access to.
export function revocableEntries(state: ViewState): FeedEntry[] {
  return state.feed.filter((e) => e.mine && e.protected);
}

// Candidates for a revoke dropdown: everyone but the owner.
export function revocationTargets(state: ViewState): DirectoryUser[] {
  return state.directory.filter((u) => u.user_id !== state.userId);
}

// ---------------------------------------------------------------------------
// optimistic updates: apply immediately, roll back if the API call fails
// ---------------------------------------------------------------------------

export interface Rollback {
  (state: ViewState): ViewState;
}

export function optimisticallyRemoveRequest(
  state: ViewState,
  requestId: string,
): { state: ViewState; rollback: Rollback } {
  const removed = state.inbox.find((r) => r.request_id === requestId);
  const next = {
    ...state,
    inbox: state.inbox.filter((r) => r.request_id !== requestId),
  };
  return {
    state: next,
    rollback: (s) => (removed ? { ...s, inbox: [...s.inbox, removed] } : s),
  };
}

// ---------------------------------------------------------------------------
// compose form
// ---------------------------------------------------------------------------

export interface ComposeState {
  text: string;
  visibility: "public" | "private" | "circle";
  audience: "users" | "new-key";
  toUsers: string[];
  newKeyHolders: string[];
  circleId: string | null;
}

export function emptyCompose(): ComposeState {
  return {
    text: "",
    visibility: "private",
    audience: "users",
    toUsers: [],
    newKeyHolders: [],
    circleId: null,
  };
}

export type ComposeCheck =
  | { ok: true; request: ComposeRequest }
  | { ok: false; problem: string };

// Turn the picker state into a gateway request, or say what is missing.
export function buildCompose(compose: ComposeState): ComposeCheck {
  if (!compose.text.trim()) {
    return { ok: false, problem: "write something first" };
  }
  const base = {
    text: compose.text,
    to_users: [] as string[],
    via_keys: [] as string[],
    new_key_holders: [] as string[],
    circle_id: null as string | null,
  };
  switch (compose.visibility) {
    case "public":
      return { ok: true, request: { ...base, visibility: "public" } };
    case "circle":
      if (!compose.circleId) {
        return { ok: false, problem: "pick a circle" };
      }
      return {
        ok: true,
        request: { ...base, visibility: "circle", circle_id: compose.circleId },
      };
    case "private":
      if (compose.audience === "users") {
        if (compose.toUsers.length === 0) {
          return { ok: false, problem: "pick at least one person" };
        }
        return {
          ok: true,
          request: { ...base, visibility: "private", to_users: compose.toUsers },
        };
      }
      if (compose.newKeyHolders.length === 0) {
        return { ok: false, problem: "pick at least one key holder" };
      }
      return {
        ok: true,
        request: {
          ...base,
          visibility: "private",
          new_key_holders: compose.newKeyHolders,
        },
      };
  }
}

// How a feed entry should render; locked and decrypted are visually
// distinct by contract.
export interface EntryView {
  contentId: string;
  ownerLabel: string;
  badge: string;
  locked: boolean;
  bodyText: string;
  detail: string;
}

export function entryView(state: ViewState, entry: FeedEntry): EntryView {
  const owner = entry.mine ? "you" : nameOf(state, entry.owner_id);
  const badge =
    entry.visibility === "circle" ? `circle · epoch ${entry.epoch ?? "?"}` : entry.visibility;
  switch (entry.status) {
    case "public":
    case "decrypted":
      return {
        contentId: entry.content_id,
        ownerLabel: owner,
        badge,
        locked: false,
        bodyText: entry.text ?? "",
        detail: entry.status === "decrypted" ? "decrypted locally" : "",
      };
    case "pending":
      return {
        contentId: entry.content_id,
        ownerLabel: owner,
        badge,
        locked: true,
        bodyText: "waiting for key holders",
        detail: `missing: ${entry.missing_keys.map((k) => nameOf(state, k)).join(", ")}`,
      };
    case "locked":
      return {
        contentId: entry.content_id,
        ownerLabel: owner,
        badge,
        locked: true,
        bodyText: "no access",
        detail: "",
      };
  }
}
