import os
import unittest
import numpy as np
from data.defs import SCENARIO_DIR
from gasmix.core.error_handler import ControlRatioError, ErrorHandler, UnknownNodeError, ValidationError
from gasmix.core.models.pipe import NodeRole, Pipe, RoleKind
from gasmix.core.network.builder import NetworkBuilder
from gasmix.core.scenario.parser import ScenarioParser


def pipe(pipe_id, start, end, length_km=10.0, **kwargs):
    return Pipe(id=pipe_id, from_node=start, to_node=end, length_km=length_km, diameter_m=0.5, friction=0.01,
                **kwargs)


class TestNetwork(unittest.TestCase):
    """
    A class containing unit tests for network validation, refinement and incidence assembly.

    Methods
    -------
    test_canonical_order()
        Slack, injection and withdrawal nodes are put in that order.
    test_validation_errors()
        Malformed networks are rejected with the matching error.
    test_case_study_refinement()
        The five-pipe case-study network refines into 240 edges at 1 km, keeping length and volume.
    test_refinement_keeps_controls_at_pipe_ends()
        Compressor and regulator stay on the first and last sub-edge.
    test_incidence_structure()
        Incidence rows carry the control ratios and the node volumes match.
    test_control_ratio_below_one()
        Ratios below one are rejected when matrices are assembled.
    """

    def setUp(self):
        self.error_handler = ErrorHandler()
        self.builder = NetworkBuilder(self.error_handler)
        self.roles = [
            NodeRole("out", RoleKind.WITHDRAWAL),
            NodeRole("src", RoleKind.SLACK),
            NodeRole("inj", RoleKind.INJECTION),
        ]
        self.pipes = [pipe("a", "src", "inj"), pipe("b", "inj", "out")]

    def test_canonical_order(self):
        graph = self.builder.build_graph(self.pipes, self.roles)
        self.assertEqual(graph.node_ids, ["src", "inj", "out"])
        self.assertEqual(graph.slack_ids, ["src"])
        self.assertEqual(graph.nonslack_ids, ["inj", "out"])
        self.assertEqual(graph.permutation, (1, 2, 0))

    def test_validation_errors(self):
        slack = NodeRole("src", RoleKind.SLACK)
        out = NodeRole("out", RoleKind.WITHDRAWAL)
        cases = [
            ([pipe("a", "src", "out")], [NodeRole("src", RoleKind.WITHDRAWAL), out]),        # no slack
            ([pipe("a", "src", "out")], [slack, out, NodeRole("out", RoleKind.WITHDRAWAL)]),  # duplicate id
            ([pipe("a", "out", "src")], [slack, out]),                                         # enters slack
            ([pipe("a", "src", "out")], [slack, out, NodeRole("lone", RoleKind.WITHDRAWAL)]),  # no inflow
            ([pipe("a", "src", "out"), pipe("b", "x", "y")],
             [slack, out, NodeRole("x", RoleKind.SLACK), NodeRole("y", RoleKind.WITHDRAWAL)]),  # disconnected
            ([pipe("a", "src", "out", length_km=0.0)], [slack, out]),                          # geometry
        ]
        for pipes, roles in cases:
            with self.assertRaises(ValidationError):
                self.builder.build_graph(pipes, roles)
        with self.assertRaises(UnknownNodeError):
            self.builder.build_graph([pipe("a", "src", "nowhere")], [slack, out])

    def test_case_study_refinement(self):
        scenario = ScenarioParser(self.builder, self.error_handler).load(os.path.join(SCENARIO_DIR, "blended_5mpa_a.yaml"))
        graph = scenario.graph
        self.assertEqual(graph.edge_count, 5)
        self.assertAlmostEqual(graph.total_length_km, 240.0)
        refined = self.builder.refine(graph, 1.0)
        self.assertEqual(refined.edge_count, 240)
        self.assertEqual(refined.node_count, 5 + 235)
        self.assertEqual(refined.physical_ids, graph.physical_ids)
        self.assertTrue(all(p.length_km <= 1.0 + 1e-12 for p in refined.pipes))
        self.assertAlmostEqual(refined.total_length_km, graph.total_length_km)
        self.assertAlmostEqual(refined.total_volume, graph.total_volume, delta=1e-9 * graph.total_volume)
        self.assertEqual(self.builder.refine(refined, 1.0).edge_count, refined.edge_count)

    def test_refinement_keeps_controls_at_pipe_ends(self):
        graph = self.builder.build_graph(
            [pipe("a", "src", "out", length_km=3.0, compressor_ratio=1.2, regulator_ratio=1.1)],
            [NodeRole("src", RoleKind.SLACK), NodeRole("out", RoleKind.WITHDRAWAL)])
        refined = self.builder.refine(graph, 1.0)
        ratios = [(p.compressor_ratio, p.regulator_ratio) for p in refined.pipes]
        self.assertEqual(ratios, [(1.2, 1.0), (1.0, 1.0), (1.0, 1.1)])
        self.assertTrue(all(p.source_id == "a" for p in refined.pipes))

    def test_incidence_structure(self):
        graph = self.builder.build_graph(
            [pipe("a", "src", "mid", compressor_ratio=1.3), pipe("b", "mid", "out", regulator_ratio=1.2),
             pipe("c", "src", "out")],
            [NodeRole("src", RoleKind.SLACK), NodeRole("mid", RoleKind.WITHDRAWAL),
             NodeRole("out", RoleKind.WITHDRAWAL)])
        inc = self.builder.incidence_matrices(graph, compressor={"a": 1.5})
        np.testing.assert_allclose(inc.M, [[-1.5, 1.0, 0.0], [0.0, -1.0, 1.2], [-1.0, 0.0, 1.0]])
        np.testing.assert_allclose(inc.M_d_pos + inc.M_d_neg, inc.M_d)
        np.testing.assert_array_equal(inc.Q_d, np.sign(inc.M_d))
        volume = inc.areas * inc.lengths
        np.testing.assert_allclose(inc.r, [volume[0], 1.2 * volume[1] + volume[2]])
        self.assertEqual(inc.X.shape, (3, 3))

    def test_control_ratio_below_one(self):
        graph = self.builder.build_graph(self.pipes, self.roles)
        with self.assertRaises(ControlRatioError):
            self.builder.incidence_matrices(graph, compressor={"a": 0.9})


if __name__ == "__main__":
    unittest.main()
