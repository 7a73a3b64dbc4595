"""
Network Steps

Steps file for networks.feature
"""

import requests
from compare3 import expect
from behave import given, when, then  # pylint: disable=no-name-in-module

# HTTP Return Codes
HTTP_200_OK = 200

WAIT_TIMEOUT = 60


def _post(context, workflow: str, **extra):
    rest_endpoint = f"{context.base_url}/api/networks/{workflow}"
    context.resp = requests.post(rest_endpoint, json={"source": context.source, **extra}, timeout=WAIT_TIMEOUT)


@given("the service is running")
def step_impl(context):
    """Make sure the service answers its health check"""
    context.resp = requests.get(f"{context.base_url}/health", timeout=WAIT_TIMEOUT)
    expect(context.resp.status_code).equal_to(HTTP_200_OK)


@given("the source")
def step_impl(context):
    """Use the step text as the network source"""
    context.source = context.text + "\n"


@given('the "{name}" construction')
def step_impl(context, name):
    """Fetch a shipped construction as the network source"""
    context.resp = requests.get(f"{context.base_url}/api/constructions/{name}", timeout=WAIT_TIMEOUT)
    expect(context.resp.status_code).equal_to(HTTP_200_OK)
    context.source = context.resp.text


@when("I list the constructions")
def step_impl(context):
    """Read the catalog"""
    context.resp = requests.get(f"{context.base_url}/api/constructions", timeout=WAIT_TIMEOUT)
    expect(context.resp.status_code).equal_to(HTTP_200_OK)


@when("I validate the source")
def step_impl(context):
    """Post the source to the validate workflow"""
    _post(context, "validate")


@when("I simulate the source to {t_end:g} with {samples:d} samples")
def step_impl(context, t_end, samples):
    """Post the source to the simulate workflow"""
    _post(context, "simulate", t_end=t_end, samples=samples)


@when("I run the limits at precision {tau:g}")
def step_impl(context, tau):
    """Post the source to the limit workflow"""
    _post(context, "limit", tau=tau)


@then('I should see "{name}" in the catalog')
def step_impl(context, name):
    """The catalog names include name"""
    expect(name in context.resp.json()).equal_to(True)


@then("the catalog should have {count:d} entries")
def step_impl(context, count):
    """The catalog has count names"""
    expect(len(context.resp.json())).equal_to(count)


@then("the status code should be {code:d}")
def step_impl(context, code):
    """The last response has the status code"""
    expect(context.resp.status_code).equal_to(code)


@then('the first diagnostic should be "{message}" at line {line:d} column {start:d}')
def step_impl(context, message, line, start):
    """The first diagnostic has the message and the span start"""
    diagnostic = context.resp.json()["diagnostics"][0]
    expect(diagnostic["message"]).equal_to(message)
    expect(diagnostic["line"]).equal_to(line)
    expect(diagnostic["start"]).equal_to(start)


@then('channel "{channel}" should be about "{value}" at sample {index:d}')
def step_impl(context, channel, value, index):
    """The channel value at a sample is within 1e-6 of value"""
    sample = context.resp.json()["channels"][channel]["values"][index]
    expect(abs(sample - float(value)) < 1e-6).equal_to(True)


@then('the limit "{module}" should be certified')
def step_impl(context, module):
    """The named limit module is certified"""
    limits = {item["module"]: item for item in context.resp.json()["limits"]}
    expect(limits[module]["certified"]).equal_to(True)
