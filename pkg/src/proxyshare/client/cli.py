"""Command-line interface.

    proxyshare register --server URL --name NAME --wallet PATH
    proxyshare post [--public | --to USERS | --via-key ID | --new-key --holders USERS | --circle ID] MESSAGE
    proxyshare read CONTENT_ID
    proxyshare revoke CONTENT_ID VIEWER_ID
    proxyshare circle {create,join,post,rotate} ...
    proxyshare proxy serve [--once] [--interval S]
    proxyshare gateway --port P [--static DIR]
    proxyshare quorum {simulate,exact} --members N --keys K ...
    proxyshare server --listen HOST:PORT [--storage PATH] [--group LABEL]

The wallet passphrase comes from --passphrase or $PROXYSHARE_PASSPHRASE.
"""

from __future__ import annotations

import json
import os
import sys
import time

import click

from .. import quorum
from ..errors import InfeasibleQuorum
from .workflows import SharesPending, UserSession


def _passphrase(value: str | None) -> str:
    passphrase = value or os.environ.get("PROXYSHARE_PASSPHRASE")
    if not passphrase:
        raise click.UsageError("set --passphrase or PROXYSHARE_PASSPHRASE")
    return passphrase


wallet_opt = click.option(
    "--wallet", "wallet_path", default="wallet.json", show_default=True, help="wallet file"
)
pass_opt = click.option("--passphrase", default=None, help="wallet passphrase (or env)")


def _session(wallet_path: str, passphrase: str | None) -> UserSession:
    return UserSession.open(wallet_path, _passphrase(passphrase))


@click.group()
def main():
    """Encrypted social sharing through blinded server-side re-encryption."""


@main.command()
@click.option("--server", required=True, help="relay base URL")
@click.option("--name", required=True, help="display name")
@wallet_opt
@pass_opt
def register(server, name, wallet_path, passphrase):
    """Create a key pair, register it, and write the wallet."""
    session = UserSession.register(server, name, wallet_path, _passphrase(passphrase))
    click.echo(f"registered {name} as {session.user_id}; wallet at {wallet_path}")


@main.command()
@click.argument("message")
@click.option("--public", "visibility", flag_value="public")
@click.option("--private", "visibility", flag_value="private", default=True)
@click.option("--circle", "circle_id", default=None, help="post into this circle")
@click.option("--to", "to_users", default="", help="comma-separated user ids")
@click.option("--via-key", "via_keys", default="", help="comma-separated key ids")
@click.option("--new-key", is_flag=True, help="mint a fresh distribution key")
@click.option("--holders", default="", help="holders for --new-key")
@wallet_opt
@pass_opt
def post(message, visibility, circle_id, to_users, via_keys, new_key, holders, wallet_path, passphrase):
    """Publish a post with the chosen audience."""
    session = _session(wallet_path, passphrase)
    data = message.encode()
    if circle_id:
        content_id = session.post_circle(circle_id, data)
    elif visibility == "public":
        content_id = session.post_public(data)
    else:
        content_id = session.post_private(
            data,
            to_users=[u for u in to_users.split(",") if u],
            via_keys=[k for k in via_keys.split(",") if k],
            new_key_holders=[u for u in holders.split(",") if u] if new_key else (),
        )
    click.echo(content_id)


@main.command()
@click.argument("content_id")
@click.option("--wait", default=10, show_default=True, help="poll attempts for shares")
@wallet_opt
@pass_opt
def read(content_id, wait, wallet_path, passphrase):
    """Fetch, unblind, and decrypt one item."""
    session = _session(wallet_path, passphrase)
    try:
        data = session.read(content_id, poll_attempts=wait)
    except SharesPending as pending:
        click.echo(f"still waiting on keys: {', '.join(pending.missing)}", err=True)
        sys.exit(2)
    click.echo(data.decode(errors="replace"))


@main.command()
@click.argument("content_id")
@click.argument("viewer_id")
@wallet_opt
@pass_opt
def revoke(content_id, viewer_id, wallet_path, passphrase):
    """Delete the viewer's blinding record for this content."""
    session = _session(wallet_path, passphrase)
    deleted = session.revoke(content_id, viewer_id)
    click.echo("revoked" if deleted else "no grant to revoke")


@main.group()
def circle():
    """Circle management."""


@circle.command("create")
@click.option("--name", required=True)
@click.option("--members", required=True, help="comma-separated user ids")
@click.option("--keys", default=None, type=int, help="number of distribution keys")
@click.option("--keys-per-member", default=1, show_default=True, type=int)
@wallet_opt
@pass_opt
def circle_create(name, members, keys, keys_per_member, wallet_path, passphrase):
    session = _session(wallet_path, passphrase)
    circle_id = session.create_circle(
        name, [m for m in members.split(",") if m], keys=keys, keys_per_member=keys_per_member
    )
    click.echo(circle_id)


@circle.command("join")
@click.argument("circle_id")
@wallet_opt
@pass_opt
def circle_join(circle_id, wallet_path, passphrase):
    _session(wallet_path, passphrase).join_circle(circle_id)
    click.echo("joined")


@circle.command("post")
@click.argument("circle_id")
@click.argument("message")
@wallet_opt
@pass_opt
def circle_post(circle_id, message, wallet_path, passphrase):
    session = _session(wallet_path, passphrase)
    click.echo(session.post_circle(circle_id, message.encode()))


@circle.command("rotate")
@click.argument("circle_id")
@wallet_opt
@pass_opt
def circle_rotate(circle_id, wallet_path, passphrase):
    session = _session(wallet_path, passphrase)
    click.echo(f"epoch {session.rotate_circle(circle_id)}")


@main.group()
def proxy():
    """Key-holder duties."""


@proxy.command("serve")
@click.option("--once", is_flag=True, help="answer the current inbox and exit")
@click.option("--interval", default=1.0, show_default=True, type=float)
@click.option("--auto-approve/--interactive", default=False, show_default=True)
@wallet_opt
@pass_opt
def proxy_serve(once, interval, auto_approve, wallet_path, passphrase):
    """List incoming share requests; approve them (prompted, or all with
    --auto-approve)."""
    session = _session(wallet_path, passphrase)
    session.sync_wrapped_keys()
    while True:
        for request in session.inbox():
            line = f"request {request['request_id']} from {request['requester_id']} for {request['content_id']}"
            if auto_approve or click.confirm(f"{line}; approve?", default=True):
                if session.approve_request(request):
                    click.echo(f"answered {request['request_id']}")
            else:
                session.deny_request(request)
                click.echo(f"denied {request['request_id']}")
        if once:
            break
        time.sleep(interval)


@main.command()
@click.option("--port", default=8700, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", default=None, help="built web UI directory")
@wallet_opt
@pass_opt
def gateway(port, host, static_dir, wallet_path, passphrase):
    """Local API for the web UI; owns the wallet so the browser never
    touches key material."""
    import uvicorn

    from .gateway import create_gateway

    session = _session(wallet_path, passphrase)
    session.sync_wrapped_keys()
    uvicorn.run(create_gateway(session, static_dir), host=host, port=port)


@main.group("quorum")
def quorum_group():
    """Key-coverage threshold statistics."""


def _emit_stats(stats: quorum.ThresholdStats, as_json: bool) -> None:
    if as_json:
        payload = {
            "mean_picks": stats.mean_picks,
            "p_window_4_6": stats.p_window,
            "stderr_mean": stats.stderr_mean,
            "trials": stats.trials,
            "infeasible_trials": stats.infeasible_trials,
            "pick_distribution": {str(k): v for k, v in sorted(stats.pick_distribution.items())},
        }
        click.echo(json.dumps(payload, indent=2))
        return
    click.echo(f"{'picks':>6}  probability")
    for picks, probability in sorted(stats.pick_distribution.items()):
        click.echo(f"{picks:>6}  {probability:.6f}")
    se = f" (se {stats.stderr_mean:.4f})" if stats.stderr_mean is not None else ""
    click.echo(
        f"mean picks {stats.mean_picks:.4f}{se}; P(4..6 picks) {stats.p_window:.4f}; "
        f"infeasible trials {stats.infeasible_trials}"
    )


@quorum_group.command("simulate")
@click.option("--members", required=True, type=int)
@click.option("--keys", required=True, type=int)
@click.option("--keys-per-member", required=True, type=int)
@click.option("--trials", default=200_000, show_default=True, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--strategy", type=click.Choice(quorum.STRATEGIES), default="member", show_default=True)
@click.option("--fixed-assignment", is_flag=True, help="draw one assignment, vary pick order only")
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
def quorum_simulate(members, keys, keys_per_member, trials, seed, strategy, fixed_assignment, as_json):
    """Monte Carlo estimate of picks needed for full key coverage."""
    try:
        stats = quorum.simulate_threshold(
            members,
            keys,
            keys_per_member,
            trials,
            rng=seed,
            strategy=strategy,
            fresh_assignment=not fixed_assignment,
        )
    except InfeasibleQuorum as exc:
        raise click.ClickException(str(exc))
    _emit_stats(stats, as_json)


@quorum_group.command("exact")
@click.option("--members", required=True, type=int)
@click.option("--keys", required=True, type=int)
@click.option("--keys-per-member", required=True, type=int)
@click.option("--strategy", type=click.Choice(quorum.STRATEGIES), default="member", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def quorum_exact(members, keys, keys_per_member, strategy, as_json):
    """Exact distribution by enumeration (small configurations)."""
    try:
        stats = quorum.exact_threshold(members, keys, keys_per_member, strategy=strategy)
    except InfeasibleQuorum as exc:
        raise click.ClickException(str(exc))
    _emit_stats(stats, as_json)


@main.command()
@click.option("--listen", default="127.0.0.1:8600", show_default=True, envvar="PROXYSHARE_LISTEN")
@click.option("--storage", default=None, envvar="PROXYSHARE_STORAGE", help="append-log path (memory if unset)")
@click.option("--group", default="modp-2048", show_default=True, envvar="PROXYSHARE_GROUP")
def server(listen, storage, group):
    """Run the relay service."""
    from ..server.app import run_server

    run_server(listen, group, storage)


if __name__ == "__main__":
    main()
