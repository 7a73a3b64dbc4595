"""
L-GPAC API Service Test Suite
"""

# pylint: disable=duplicate-code
import logging
from pathlib import Path
from unittest import TestCase

from wsgi import app
from lgpac.common import status

BASE_URL = "/api/networks"
NETWORKS = Path(__file__).resolve().parent.parent / "lgpac" / "static" / "networks"


def shipped(name: str) -> str:
    """Source of a shipped network"""
    return (NETWORKS / f"{name}.lgpac").read_text(encoding="utf-8")


######################################################################
#  T E S T   C A S E S
######################################################################
class TestNetworkService(TestCase):
    """REST API Server Tests"""

    @classmethod
    def setUpClass(cls):
        """Run once before all tests"""
        app.config["TESTING"] = True
        app.config["DEBUG"] = False
        app.logger.setLevel(logging.CRITICAL)

    def setUp(self):
        """Runs before each test"""
        self.client = app.test_client()

    ######################################################################
    #  P L A C E   T E S T   C A S E S   H E R E
    ######################################################################

    def test_index(self):
        """It should call the home page"""
        resp = self.client.get("/")
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        self.assertEqual(resp.get_json()["name"], "L-GPAC Simulation Service")

    def test_health(self):
        """It should be healthy"""
        resp = self.client.get("/health")
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        self.assertEqual(resp.get_json()["message"], "Healthy")

    def test_no_session_secret(self):
        """It should not configure a session secret"""
        self.assertIsNone(app.config["SECRET_KEY"])
        self.assertIn("METRIC_TERMS", app.config)


    # ----------------------------------------------------------
    # TEST VALIDATE
    # ----------------------------------------------------------
    def test_validate(self):
        """It should validate a shipped network"""
        resp = self.client.post(f"{BASE_URL}/validate", json={"source": shipped("gamma")})
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        data = resp.get_json()
        self.assertTrue(data["valid"])
        self.assertEqual(data["diagnostics"], [])

    def test_validate_diagnostics(self):
        """It should return 400 with the diagnostics of a bad source"""
        resp = self.client.post(f"{BASE_URL}/validate", json={"source": "time t\nwire t -> b.in1\n"})
        self.assertEqual(resp.status_code, status.HTTP_400_BAD_REQUEST)
        data = resp.get_json()
        self.assertFalse(data["valid"])
        diagnostic = data["diagnostics"][0]
        self.assertEqual(diagnostic["message"], "unknown module 'b'")
        self.assertEqual((diagnostic["line"], diagnostic["start"], diagnostic["end"]), (2, 10, 11))

    def test_validate_violations(self):
        """It should return the violations of a network that parses"""
        source = "time t\nadder p { in1 = t; in2 = q }\nadder q { in1 = p; in2 = t }\noutput p\n"
        resp = self.client.post(f"{BASE_URL}/validate", json={"source": source})
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        data = resp.get_json()
        self.assertFalse(data["valid"])
        self.assertIn("algebraic-cycle", [v["code"] for v in data["violations"]])

    def test_missing_source(self):
        """It should not accept a body without a source"""
        resp = self.client.post(f"{BASE_URL}/validate", json={"text": "time t"})
        self.assertEqual(resp.status_code, status.HTTP_400_BAD_REQUEST)
        resp = self.client.post(f"{BASE_URL}/simulate", json={"source": shipped("inverter"), "t_end": "ten"})
        self.assertEqual(resp.status_code, status.HTTP_400_BAD_REQUEST)
        resp = self.client.post(f"{BASE_URL}/simulate", json={"source": shipped("inverter"), "samples": 1})
        self.assertEqual(resp.status_code, status.HTTP_400_BAD_REQUEST)

    # ----------------------------------------------------------
    # TEST COMPILE
    # ----------------------------------------------------------
    def test_compile(self):
        """It should return the compiled inverter"""
        resp = self.client.post(f"{BASE_URL}/compile", json={"source": shipped("inverter")})
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        data = resp.get_json()
        self.assertEqual(data["states"][0]["dynamics"], "(* (* -1 (* a a)) (d b))")

    def test_compile_diagnostics(self):
        """It should return 400 with diagnostics when the source does not parse"""
        resp = self.client.post(f"{BASE_URL}/compile", json={"source": "frobnicate\n"})
        self.assertEqual(resp.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(resp.get_json()["diagnostics"][0]["message"], "unknown statement 'frobnicate'")

    # ----------------------------------------------------------
    # TEST SIMULATE
    # ----------------------------------------------------------
    def test_simulate(self):
        """It should simulate the inverter"""
        resp = self.client.post(f"{BASE_URL}/simulate", json={"source": shipped("inverter"), "t_end": 2, "samples": 3})
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        data = resp.get_json()
        self.assertEqual(data["times"], [0.0, 1.0, 2.0])
        self.assertAlmostEqual(data["channels"]["a"]["values"][1], 0.5, places=6)
        self.assertNotIn("a_sq", data["channels"])

    def test_simulate_blow_up(self):
        """It should return 422 with the frontier when the solution blows up"""
        resp = self.client.post(f"{BASE_URL}/simulate", json={"source": shipped("speedup"), "t_end": 2})
        self.assertEqual(resp.status_code, status.HTTP_422_UNPROCESSABLE_ENTITY)
        self.assertLessEqual(resp.get_json()["frontier"], 1.05)

    def test_simulate_unbound_input(self):
        """It should return 400 when an input has no binding"""
        source = "input k : RScalar\ntime t\nconst zero = 0\nintegrator w { c = k; u = zero; v = t }\noutput w\nsimulate 1\n"
        resp = self.client.post(f"{BASE_URL}/simulate", json={"source": source})
        self.assertEqual(resp.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn("'k'", resp.get_json()["message"])

    # ----------------------------------------------------------
    # TEST LIMIT
    # ----------------------------------------------------------
    def test_limit(self):
        """It should certify zeta at a low precision"""
        resp = self.client.post(f"{BASE_URL}/limit", json={"source": shipped("zeta"), "tau": 2})
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        limit = resp.get_json()["limits"][0]
        self.assertEqual(limit["module"], "zeta")
        self.assertTrue(limit["certified"])
        self.assertEqual(limit["sample_times"], [2.0, 3.0])

    def test_limit_without_precision(self):
        """It should return 400 when no precision is given"""
        resp = self.client.post(f"{BASE_URL}/limit", json={"source": shipped("inverter")})
        self.assertEqual(resp.status_code, status.HTTP_400_BAD_REQUEST)

    # ----------------------------------------------------------
    # TEST CONSTRUCTIONS
    # ----------------------------------------------------------
    def test_list_constructions(self):
        """It should list every construction"""
        resp = self.client.get("/api/constructions")
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        data = resp.get_json()
        self.assertEqual(len(data), 16)
        self.assertIn("gamma", data)

    def test_get_construction(self):
        """It should return a construction as .lgpac text"""
        resp = self.client.get("/api/constructions/inverter")
        self.assertEqual(resp.status_code, status.HTTP_200_OK)
        self.assertEqual(resp.content_type, "text/plain; charset=utf-8")
        self.assertEqual(resp.get_data(as_text=True), shipped("inverter"))

    def test_construction_not_found(self):
        """It should not find an unknown construction"""
        resp = self.client.get("/api/constructions/beta")
        self.assertEqual(resp.status_code, status.HTTP_404_NOT_FOUND)
        self.assertIn("was not found", resp.get_json()["message"])

    ######################################################################
    #  T E S T   S A D   P A T H S
    ######################################################################
    def test_method_not_allowed(self):
        """It should not allow GET on a workflow"""
        resp = self.client.get(f"{BASE_URL}/simulate")
        self.assertEqual(resp.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)

    def test_unknown_url(self):
        """It should return 404 for an unknown URL"""
        resp = self.client.get("/nothing/here")
        self.assertEqual(resp.status_code, status.HTTP_404_NOT_FOUND)
