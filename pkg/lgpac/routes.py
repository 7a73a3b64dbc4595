"""
L-GPAC Service with Flask-RESTx

This service exposes the network workflows over HTTP: validate, compile,
simulate and run the limit modules of a network written in the .lgpac
language, and read the catalog of shipped constructions.

The Swagger documentation is automatically generated and available at /apidocs/
endpoint when the service is running.
"""

import json

from flask import jsonify, request, current_app as app
from flask_restx import Api, Resource, fields
from lgpac.common import status  # HTTP Status Codes
from lgpac.constructions import catalog_names, construction
from lgpac.dsl import construction_document, print_document, to_network
from lgpac.dsl.parser import parse_document
from lgpac.models.compiler import compile_network
from lgpac.simulator import traces_to_json
from lgpac import workflows


@app.route("/health")
def health_check():
    """Let them know our heart is still beating"""
    return jsonify(status=200, message="Healthy"), status.HTTP_200_OK


@app.route("/")
def index():
    """Root URL response for the L-GPAC Service"""
    app.logger.info("Request for the root URL")
    return (
        jsonify(
            name="L-GPAC Simulation Service",
            version="1.0",
            docs=f"{request.url_root}apidocs/",
        ),
        status.HTTP_200_OK,
    )


api = Api(
    app,
    version="1.0",
    title="L-GPAC Simulation Service",
    description="Validate, simulate and certify limits of analog networks",
    doc="/apidocs/",
)

######################################################################
# API INITIALIZATION
######################################################################
network_ns = api.namespace("networks", path="/api/networks", description="Network workflows")
construction_ns = api.namespace("constructions", path="/api/constructions", description="Shipped constructions")


######################################################################
# API Models
######################################################################
source_model = api.model(
    "Source",
    {"source": fields.String(required=True, description="Network in the .lgpac language")},
)

simulate_model = api.inherit(
    "SimulateRequest",
    source_model,
    {
        "t_end": fields.Float(description="Horizon; defaults to the source's simulate statement"),
        "samples": fields.Integer(description="Number of sample times"),
    },
)

limit_model = api.inherit(
    "LimitRequest",
    source_model,
    {"tau": fields.Float(description="Precision 2^-tau; defaults to the source's precision statement")},
)


def _payload(*numbers: str) -> dict:
    """The JSON body with its source checked and optional numbers coerced"""
    payload = api.payload
    if not isinstance(payload, dict) or not isinstance(payload.get("source"), str):
        network_ns.abort(status.HTTP_400_BAD_REQUEST, "Request body needs a 'source' string")
    for name in numbers:
        value = payload.get(name)
        if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
            network_ns.abort(status.HTTP_400_BAD_REQUEST, f"'{name}' must be a number")
    return payload


######################################################################
# NETWORK WORKFLOWS
######################################################################
@network_ns.route("/validate", strict_slashes=False)
class ValidateResource(Resource):
    """Parse and validate a network"""

    @network_ns.doc("validate_network")
    @network_ns.expect(source_model)
    def post(self):
        """Validate a network; 400 when the source has diagnostics"""
        app.logger.info("Request to validate a network")
        result, report = workflows.check(_payload()["source"])
        diagnostics = [d.serialize() for d in result.diagnostics]
        if report is None:
            return {"valid": False, "violations": [], "diagnostics": diagnostics}, status.HTTP_400_BAD_REQUEST
        body = report.serialize()
        return {"valid": body["valid"], "violations": body["violations"], "diagnostics": diagnostics,
                "note": body["note"]}, status.HTTP_200_OK


@network_ns.route("/compile", strict_slashes=False)
class CompileResource(Resource):
    """Compile a network to its first-order system"""

    @network_ns.doc("compile_network")
    @network_ns.expect(source_model)
    def post(self):
        """Return the compiled system"""
        doc = parse_document(_payload()["source"])
        system = compile_network(to_network(doc), doc.grid)
        return system.serialize(), status.HTTP_200_OK


@network_ns.route("/simulate", strict_slashes=False)
class SimulateResource(Resource):
    """Simulate a network"""

    @network_ns.doc("simulate_network")
    @network_ns.expect(simulate_model)
    def post(self):
        """Return the traces of the output channels; 422 on blow-up"""
        payload = _payload("t_end", "samples")
        samples = payload.get("samples")
        if samples is not None and (not isinstance(samples, int) or samples < 2):
            network_ns.abort(status.HTTP_400_BAD_REQUEST, "'samples' must be an integer of at least 2")
        work = workflows.load(payload["source"])
        traces = workflows.run_simulation(work, payload.get("t_end"), payload.get("samples"))
        app.logger.info("Simulated %s with %d channels", work.network.name, len(traces))
        selected = {name: traces[name] for name in workflows.output_channels(work)}
        return json.loads(traces_to_json(selected)), status.HTTP_200_OK


@network_ns.route("/limit", strict_slashes=False)
class LimitResource(Resource):
    """Run the limit modules of a network"""

    @network_ns.doc("limit_network")
    @network_ns.expect(limit_model)
    def post(self):
        """Return one certified limit per limit module"""
        payload = _payload("tau")
        work = workflows.load(payload["source"])
        limits = workflows.run_limits(work, payload.get("tau"))
        return {"limits": [{"module": module, **limit.serialize()} for module, limit in limits.items()]}, \
            status.HTTP_200_OK


######################################################################
# CATALOG
######################################################################
@construction_ns.route("", strict_slashes=False)
class ConstructionCollection(Resource):
    """The shipped constructions"""

    @construction_ns.doc("list_constructions")
    def get(self):
        """List the construction names"""
        return catalog_names(), status.HTTP_200_OK


@construction_ns.route("/<string:name>", strict_slashes=False)
class ConstructionResource(Resource):
    """One shipped construction"""

    @construction_ns.doc("get_construction")
    @construction_ns.produces(["text/plain"])
    def get(self, name):
        """The construction as .lgpac text"""
        if name not in catalog_names():
            construction_ns.abort(status.HTTP_404_NOT_FOUND, f"Construction '{name}' was not found.")
        text = print_document(construction_document(construction(name)))
        return app.response_class(text, status=status.HTTP_200_OK, mimetype="text/plain")
