"""Tests for curvecross"""
