// Application shell: poll the gateway, render the three panels (feed,
// compose, proxy inbox + circles), and push user decisions back through
// the gateway client. Poll interval is configurable with ?poll=<ms>.

import { GatewayClient, GatewayError } from "./api.js";
import type { FeedEntry, ShareRequest } from "./api.js";
import {
  buildCompose,
  ComposeState,
  emptyCompose,
  entryView,
  inboxBadge,
  initialState,
  mergeFeed,
  mergeInbox,
  nameOf,
  optimisticallyRemoveRequest,
  revocationTargets,
  ViewState,
} from "./state.js";
import { button, clear, el, flash, option } from "./ui.js";

const client = new GatewayClient();
let state: ViewState;
let compose: ComposeState = emptyCompose();

const $ = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
};

function errorText(err: unknown): string {
  if (err instanceof GatewayError) return `${err.code}: ${err.message}`;
  return String(err);
}

// ---------------------------------------------------------------- feed ----

function renderFeed(): void {
  const list = $("feed");
  clear(list);
  if (state.feed.length === 0) {
    list.append(el("p", { class: "empty" }, "nothing posted yet"));
    return;
  }
  for (const entry of state.feed) {
    list.append(renderEntry(entry));
  }
}

function renderEntry(entry: FeedEntry): HTMLElement {
  const view = entryView(state, entry);
  const card = el("article", {
    class: `entry ${view.locked ? "locked" : "open"}`,
    "data-content": view.contentId,
  });
  const head = el(
    "header",
    {},
    el("span", { class: "owner" }, view.ownerLabel),
    el("span", { class: `badge ${entry.visibility}` }, view.badge),
  );
  card.append(head);
  const body = el("p", { class: "body" }, view.locked ? `🔒 ${view.bodyText}` : view.bodyText);
  card.append(body);
  if (view.detail) {
    card.append(el("p", { class: "detail" }, view.detail));
  }
  if (entry.mine && entry.protected) {
    card.append(renderRevokeControls(entry));
  }
  return card;
}

function renderRevokeControls(entry: FeedEntry): HTMLElement {
  const select = el("select", { class: "revoke-target" });
  for (const user of revocationTargets(state)) {
    select.append(option(user.user_id, user.display_name));
  }
  const controls = el("div", { class: "revoke" }, select);
  controls.append(
    button(
      "revoke access",
      async () => {
        const viewer = (select as HTMLSelectElement).value;
        if (!viewer) return;
        try {
          const deleted = await client.revoke(entry.content_id, viewer);
          flash(
            $("status"),
            deleted
              ? `revoked ${nameOf(state, viewer)}'s access`
              : `${nameOf(state, viewer)} had no active grant`,
            "ok",
          );
        } catch (err) {
          flash($("status"), errorText(err), "err");
        }
      },
      "btn danger",
    ),
  );
  return controls;
}

// ------------------------------------------------------------- compose ----

function renderComposeTargets(): void {
  const users = $("compose-users") as HTMLSelectElement;
  clear(users);
  for (const user of state.directory) {
    if (user.user_id !== state.userId) {
      users.append(option(user.user_id, user.display_name));
    }
  }
  const circles = $("compose-circle") as HTMLSelectElement;
  clear(circles);
  for (const circle of state.circles) {
    if (circle.member_ids.includes(state.userId)) {
      circles.append(option(circle.circle_id, `${circle.name} (epoch ${circle.epoch})`));
    }
  }
}

function readComposeForm(): void {
  compose.text = ($("compose-text") as HTMLTextAreaElement).value;
  const visibility = (document.querySelector(
    'input[name="visibility"]:checked',
  ) as HTMLInputElement | null)?.value;
  compose.visibility = (visibility as ComposeState["visibility"]) ?? "private";
  compose.audience = ($("compose-audience") as HTMLSelectElement)
    .value as ComposeState["audience"];
  const selected = Array.from(
    ($("compose-users") as HTMLSelectElement).selectedOptions,
  ).map((o) => o.value);
  if (compose.audience === "users") {
    compose.toUsers = selected;
    compose.newKeyHolders = [];
  } else {
    compose.toUsers = [];
    compose.newKeyHolders = selected;
  }
  compose.circleId = ($("compose-circle") as HTMLSelectElement).value || null;
}

async function submitCompose(): Promise<void> {
  readComposeForm();
  const check = buildCompose(compose);
  if (!check.ok) {
    flash($("status"), check.problem, "err");
    return;
  }
  try {
    await client.compose(check.request);
    ($("compose-text") as HTMLTextAreaElement).value = "";
    flash($("status"), "posted", "ok");
    await refresh();
  } catch (err) {
    flash($("status"), errorText(err), "err");
  }
}

// --------------------------------------------------------------- inbox ----

function renderInbox(): void {
  $("inbox-badge").textContent = String(inboxBadge(state));
  const list = $("inbox");
  clear(list);
  if (state.inbox.length === 0) {
    list.append(el("p", { class: "empty" }, "no one is waiting on your keys"));
    return;
  }
  for (const request of state.inbox) {
    list.append(renderRequest(request));
  }
}

function renderRequest(request: ShareRequest): HTMLElement {
  const row = el(
    "div",
    { class: "request", "data-request": request.request_id },
    el(
      "p",
      {},
      `${nameOf(state, request.requester_id)} asks for your decryption help on ${request.content_id.slice(0, 8)}…`,
    ),
  );
  const act = async (verb: "approve" | "deny") => {
    const { state: next, rollback } = optimisticallyRemoveRequest(state, request.request_id);
    state = next;
    renderInbox();
    try {
      if (verb === "approve") {
        await client.approve(request.request_id);
        flash($("status"), "shares sent", "ok");
      } else {
        await client.deny(request.request_id);
        flash($("status"), "request denied", "ok");
      }
    } catch (err) {
      state = rollback(state);
      renderInbox();
      flash($("status"), errorText(err), "err");
    }
  };
  row.append(
    el(
      "div",
      { class: "actions" },
      button("approve", () => void act("approve")),
      button("deny", () => void act("deny"), "btn danger"),
    ),
  );
  return row;
}

// ------------------------------------------------------------- circles ----

function renderCircles(): void {
  const list = $("circles");
  clear(list);
  for (const circle of state.circles) {
    const member = circle.member_ids.includes(state.userId);
    const row = el(
      "div",
      { class: "circle-row" },
      el(
        "p",
        {},
        `${circle.name} — ${circle.member_ids.length} members, epoch ${circle.epoch}`,
      ),
    );
    const actions = el("div", { class: "actions" });
    if (!member) {
      actions.append(
        button("join", async () => {
          try {
            await client.joinCircle(circle.circle_id);
            flash($("status"), `joined ${circle.name}`, "ok");
            await refresh();
          } catch (err) {
            flash($("status"), errorText(err), "err");
          }
        }),
      );
    }
    if (circle.owner_id === state.userId) {
      actions.append(
        button("rotate key", async () => {
          try {
            const epoch = await client.rotateCircle(circle.circle_id);
            flash($("status"), `rotated to epoch ${epoch}`, "ok");
            await refresh();
          } catch (err) {
            flash($("status"), errorText(err), "err");
          }
        }),
      );
    }
    row.append(actions);
    list.append(row);
  }
}

async function createCircle(): Promise<void> {
  const name = ($("circle-name") as HTMLInputElement).value.trim();
  const members = Array.from(
    ($("circle-members") as HTMLSelectElement).selectedOptions,
  ).map((o) => o.value);
  if (!name || members.length === 0) {
    flash($("status"), "a circle needs a name and members", "err");
    return;
  }
  try {
    await client.createCircle(name, members);
    flash($("status"), `circle ${name} created`, "ok");
    await refresh();
  } catch (err) {
    flash($("status"), errorText(err), "err");
  }
}

function renderCircleMemberPicker(): void {
  const picker = $("circle-members") as HTMLSelectElement;
  clear(picker);
  for (const user of state.directory) {
    if (user.user_id !== state.userId) {
      picker.append(option(user.user_id, user.display_name));
    }
  }
}

// ----------------------------------------------------------------- app ----

async function refresh(): Promise<void> {
  const [feed, inbox, circles, directory] = await Promise.all([
    client.feed(),
    client.inbox(),
    client.circles(),
    client.directory(),
  ]);
  state = mergeInbox(mergeFeed({ ...state, circles, directory }, feed), inbox);
  renderFeed();
  renderInbox();
  renderCircles();
  renderComposeTargets();
  renderCircleMemberPicker();
}

async function boot(): Promise<void> {
  const me = await client.me();
  state = initialState(me.user_id);
  $("whoami").textContent = `${me.display_name} · ${me.user_id} · ${me.group_label}`;
  $("compose-send").addEventListener("click", () => void submitCompose());
  $("circle-create").addEventListener("click", () => void createCircle());
  await refresh();
  const poll = Number(new URLSearchParams(location.search).get("poll") ?? "2000");
  setInterval(() => void refresh().catch(() => undefined), poll);
}

document.addEventListener("DOMContentLoaded", () => void boot());
